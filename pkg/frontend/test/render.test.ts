import { beforeEach, describe, expect, it } from "vitest";

import { renderBundle, renderDiagnostics, type RenderResult } from "../src/render";
import { checkBundle } from "../src/schema";
import { applyDeepLink } from "../src/scroll";
import { SLICE_IDS, type StoryBundle } from "../src/types";
import bundleDoc from "./fixtures/bundle.json";

const bundle = bundleDoc as unknown as StoryBundle;

function mount(): { root: HTMLElement; result: RenderResult } {
  document.body.innerHTML = '<div id="app"></div>';
  const root = document.getElementById("app")!;
  const result = renderBundle(bundle, root);
  return { root, result };
}

describe("rendering the golden bundle", () => {
  let root: HTMLElement;
  let result: RenderResult;

  beforeEach(() => {
    ({ root, result } = mount());
  });

  it("renders six slice sections in bundle order", () => {
    const sections = [...root.querySelectorAll("section.slice")];
    expect(sections).toHaveLength(6);
    expect(sections.map((s) => (s as HTMLElement).dataset.sliceId)).toEqual([
      ...SLICE_IDS,
    ]);
    expect(sections.map((s) => s.id)).toEqual(
      [1, 2, 3, 4, 5, 6].map((n) => `slice-${n}`),
    );
  });

  it("shows the concept narrative and figures", () => {
    const narrative = root.querySelector("#slice-1 .narrative")!;
    expect(narrative.textContent).toBeTruthy();
    expect(root.querySelectorAll("#slice-1 .figure-cell").length).toBeGreaterThan(0);
  });

  it("renders one training bubble per gallery item in every frame", () => {
    const circles = root.querySelectorAll("#slice-5 .training-bubble");
    const frames = (bundle.slices[4].payload as any).frames;
    expect(circles).toHaveLength(frames[0].bubbles.length);
  });

  it("keeps the quiz out of the scroll steps", () => {
    expect(root.querySelectorAll("section.quiz")).toHaveLength(1);
    expect(result.sections).toHaveLength(6);
  });

  it("marks the scroll mode on the story element", () => {
    expect(root.querySelector("main.story")!.getAttribute("data-scroll-mode")).toBe(
      "steps",
    );
  });
});

describe("diagnostics page", () => {
  it("lists every failing path and renders nothing else", () => {
    document.body.innerHTML = '<div id="app"></div>';
    const root = document.getElementById("app")!;
    const doc = JSON.parse(JSON.stringify(bundleDoc));
    doc.slices.pop();
    const errors = checkBundle(doc);
    expect(errors.length).toBeGreaterThan(0);
    renderDiagnostics(errors, root);
    expect(root.querySelectorAll("section.slice")).toHaveLength(0);
    const items = [...root.querySelectorAll(".diagnostic")];
    expect(items.length).toBe(errors.length);
    expect(items[0].textContent).toContain("slices");
  });
});

describe("scroll steps", () => {
  it("activates slices 1 through 6 in order under monotone scrolling", () => {
    const { result } = mount();
    const seen: number[] = [];
    const sections = result.sections;
    const steps = new (Object.getPrototypeOf(result.steps).constructor)(
      sections,
      (i: number) => seen.push(i),
    );
    for (let i = 0; i < sections.length; i++) {
      steps.notifyVisible(i);
      steps.notifyVisible(i); // re-notifying the same step is a no-op
    }
    expect(seen).toEqual([0, 1, 2, 3, 4, 5]);
    expect(sections[5].classList.contains("active")).toBe(true);
    expect(sections[4].classList.contains("active")).toBe(false);
  });

  it("tracks the active slice in ui state", () => {
    const { result } = mount();
    result.steps.notifyVisible(0);
    result.steps.notifyVisible(1);
    expect(result.state.activeSlice).toBe(1);
  });

  it("deep links resolve to the right section index", () => {
    const { result } = mount();
    expect(applyDeepLink("#slice-4", result.sections)).toBe(3);
    expect(applyDeepLink("#slice-9", result.sections)).toBe(-1);
    expect(applyDeepLink("", result.sections)).toBe(-1);
  });
});
