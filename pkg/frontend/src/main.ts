import { verifyParityCases } from "./parity";
import { renderBundle, renderDiagnostics } from "./render";
import { checkBundle } from "./schema";
import { applyDeepLink } from "./scroll";
import type { ParityFixture, StoryBundle } from "./types";
import "./style.css";

async function checkParity(story: HTMLElement): Promise<void> {
  try {
    const resp = await fetch("/parity.json");
    if (!resp.ok) return;
    const doc = (await resp.json()) as ParityFixture;
    const ok = verifyParityCases(doc.cases);
    story.dataset.parity = ok ? "ok" : "mismatch";
    if (!ok) {
      console.warn("loss parity check failed: UI formula disagrees with the backend");
    }
  } catch {
    // parity fixture is optional at runtime; tests pin it hard
  }
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) return;
  let doc: unknown;
  try {
    const resp = await fetch("/bundle.json");
    if (!resp.ok) throw new Error(`bundle fetch failed: ${resp.status}`);
    doc = await resp.json();
  } catch (err) {
    renderDiagnostics([{ path: "/bundle.json", message: String(err) }], root);
    return;
  }
  const errors = checkBundle(doc);
  if (errors.length > 0) {
    renderDiagnostics(errors, root);
    return;
  }
  const result = renderBundle(doc as StoryBundle, root);
  result.steps.attach();
  const linked = applyDeepLink(window.location.hash, result.sections);
  if (linked >= 0) {
    result.steps.notifyVisible(linked);
  }
  const story = root.querySelector<HTMLElement>("main.story");
  if (story) {
    void checkParity(story);
  }
}

void boot();
