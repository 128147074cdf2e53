// Client-side structural check run before rendering. Anything invalid
// turns into a diagnostic page, never a partial render.

import { SLICE_IDS, type StoryBundle } from "./types";

export interface Diagnostic {
  path: string;
  message: string;
}

function isRecord(v: unknown): v is Record<string, unknown> {
  return typeof v === "object" && v !== null && !Array.isArray(v);
}

export function checkBundle(doc: unknown): Diagnostic[] {
  const errors: Diagnostic[] = [];
  const fail = (path: string, message: string) => errors.push({ path, message });

  if (!isRecord(doc)) {
    fail("", "bundle must be a JSON object");
    return errors;
  }
  if (doc.format_version !== 1) {
    fail("format_version", `expected 1, got ${JSON.stringify(doc.format_version)}`);
  }
  if (doc.scroll_mode !== "steps") {
    fail("scroll_mode", `expected "steps", got ${JSON.stringify(doc.scroll_mode)}`);
  }
  if (!Array.isArray(doc.palette) || doc.palette.length === 0) {
    fail("palette", "palette must be a non-empty array");
  }
  const assets = isRecord(doc.assets) ? doc.assets : null;
  if (!assets) {
    fail("assets", "assets must be an object");
  }

  const slices = doc.slices;
  if (!Array.isArray(slices)) {
    fail("slices", "slices must be an array");
    return errors;
  }
  const ids = slices.map((s) => (isRecord(s) ? s.id : undefined));
  if (ids.length !== SLICE_IDS.length || ids.some((id, i) => id !== SLICE_IDS[i])) {
    fail("slices", `slice ids must be exactly [${SLICE_IDS.join(", ")}] in order`);
    return errors;
  }

  const payloadOf = (index: number): Record<string, unknown> | null => {
    const entry = slices[index] as Record<string, unknown>;
    if (!isRecord(entry.payload)) {
      fail(`slices[${index}].payload`, "missing payload");
      return null;
    }
    return entry.payload;
  };

  const assetRef = (id: unknown, path: string) => {
    if (typeof id !== "string" || !assets || !(id in assets)) {
      fail(path, `unresolved asset reference ${JSON.stringify(id)}`);
    }
  };

  const concept = payloadOf(0);
  if (concept) {
    if (typeof concept.narrative !== "string" || !concept.narrative) {
      fail("slices[0].payload.narrative", "narrative must be non-empty text");
    }
    if (Array.isArray(concept.figure_asset_ids)) {
      concept.figure_asset_ids.forEach((id, i) =>
        assetRef(id, `slices[0].payload.figure_asset_ids[${i}]`),
      );
    }
  }

  const embedding = payloadOf(1);
  if (embedding) {
    if (typeof embedding.architecture_text !== "string") {
      fail("slices[1].payload.architecture_text", "architecture_text must be text");
    }
    if (!Array.isArray(embedding.before_grid) || !Array.isArray(embedding.after_bubbles)) {
      fail("slices[1].payload", "before_grid and after_bubbles must be arrays");
    }
  }

  const checkTriplet = (payload: Record<string, unknown>, path: string) => {
    const bubbles = payload.bubbles;
    if (!isRecord(bubbles)) {
      fail(`${path}.bubbles`, "bubbles must be an object");
      return;
    }
    for (const role of ["anchor", "positive", "negative"]) {
      const b = bubbles[role];
      if (!isRecord(b) || typeof b.x !== "number" || typeof b.y !== "number") {
        fail(`${path}.bubbles.${role}`, "bubble needs numeric x and y");
      }
    }
  };

  const distance = payloadOf(2);
  if (distance) {
    checkTriplet(distance, "slices[2].payload");
    if (!Array.isArray(distance.lines) || distance.lines.length !== 2) {
      fail("slices[2].payload.lines", "need the anchor-positive and anchor-negative lines");
    }
  }

  const loss = payloadOf(3);
  if (loss) {
    checkTriplet(loss, "slices[3].payload");
    if (typeof loss.margin_default !== "number" || loss.margin_default < 0) {
      fail("slices[3].payload.margin_default", "margin_default must be >= 0");
    }
    if (typeof loss.initial_loss !== "number") {
      fail("slices[3].payload.initial_loss", "initial_loss must be a number");
    }
  }

  const training = payloadOf(4);
  if (training) {
    if (!Array.isArray(training.frames) || training.frames.length === 0) {
      fail("slices[4].payload.frames", "frames must be non-empty");
    } else if (
      !Array.isArray(training.loss_curve) ||
      training.loss_curve.length !== training.frames.length
    ) {
      fail("slices[4].payload.loss_curve", "loss_curve length must match frames");
    }
  }

  const inference = payloadOf(5);
  if (inference) {
    assetRef(inference.query_asset_id, "slices[5].payload.query_asset_id");
    if (typeof inference.radius !== "number" || inference.radius < 0) {
      fail("slices[5].payload.radius", "radius must be >= 0");
    }
    if (!Array.isArray(inference.neighbors) || inference.neighbors.length === 0) {
      fail("slices[5].payload.neighbors", "neighbors must be non-empty");
    }
  }

  if (doc.quiz !== undefined) {
    if (!Array.isArray(doc.quiz) || doc.quiz.length !== 7) {
      fail("quiz", "quiz must have exactly 7 questions");
    }
  }
  return errors;
}

export function asBundle(doc: unknown): StoryBundle {
  const errors = checkBundle(doc);
  if (errors.length > 0) {
    throw new Error(`invalid bundle: ${errors.map((e) => e.path).join(", ")}`);
  }
  return doc as StoryBundle;
}
