// Builds the six-slice scrollable story from a validated bundle and wires
// every interaction. Each slice builder returns a small controller that
// the pointer/mouse handlers call into; tests drive the same controllers
// directly, so the interaction logic has no hidden DOM-geometry deps.

import { assetCanvas } from "./assets";
import { dist2d, tripletLoss2d, type Point } from "./math";
import type { Diagnostic } from "./schema";
import { StepController } from "./scroll";
import { AnimationController, initialState, type UiState } from "./state";
import type {
  Bubble,
  ConceptPayload,
  DistancePayload,
  EmbeddingPayload,
  InferencePayload,
  LossPayload,
  QuizQuestion,
  StoryBundle,
  TrainingPayload,
} from "./types";

const SVG_NS = "http://www.w3.org/2000/svg";
const SCENE_VIEWBOX = "-1.1 -1.1 2.2 2.2";
const QUERY_COLOR = "#D94F30";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number> = {},
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, String(value));
  }
  return node;
}

function scene(className: string): SVGSVGElement {
  return svgEl("svg", {
    class: `scene ${className}`,
    viewBox: SCENE_VIEWBOX,
    preserveAspectRatio: "xMidYMid meet",
  });
}

function bubbleCircle(bubble: Bubble, className: string, r = 0.045): SVGCircleElement {
  const circle = svgEl("circle", {
    class: className,
    cx: bubble.x,
    cy: bubble.y,
    r,
    fill: bubble.color ?? "#808080",
  });
  circle.dataset.id = bubble.id;
  return circle;
}

export interface CompareController {
  set(position: number): void;
  position(): number;
}

export interface LossController {
  moveBubble(role: "anchor" | "positive" | "negative", x: number, y: number): void;
  setMargin(margin: number): void;
  currentLoss(): number;
}

export interface InferenceController {
  drop(): void;
  toggleCircle(): void;
  dropped(): boolean;
  circleVisible(): boolean;
}

export interface RenderResult {
  sections: HTMLElement[];
  steps: StepController;
  state: UiState;
  compare: CompareController;
  loss: LossController;
  animation: AnimationController;
  inference: InferenceController;
}

export function renderDiagnostics(errors: Diagnostic[], root: HTMLElement): void {
  root.replaceChildren();
  const page = el("div", "diagnostics");
  page.appendChild(el("h1", undefined, "This story bundle cannot be shown"));
  page.appendChild(
    el("p", undefined, "The bundle failed its schema check at these paths:"),
  );
  const list = el("ul", "diagnostic-list");
  for (const err of errors) {
    list.appendChild(el("li", "diagnostic", `${err.path}: ${err.message}`));
  }
  page.appendChild(list);
  root.appendChild(page);
}

function sliceSection(index: number, sliceId: string, title: string): HTMLElement {
  const section = el("section", "slice");
  section.id = `slice-${index + 1}`;
  section.dataset.sliceId = sliceId;
  section.appendChild(el("h2", "slice-title", title));
  return section;
}

function payloadOf<T>(bundle: StoryBundle, index: number): T {
  return bundle.slices[index].payload as T;
}

// --- slice 1: concept -------------------------------------------------------

function buildConcept(bundle: StoryBundle, section: HTMLElement): void {
  const payload = payloadOf<ConceptPayload>(bundle, 0);
  section.appendChild(el("p", "narrative", payload.narrative));
  const strip = el("div", "figure-strip");
  for (const id of payload.figure_asset_ids) {
    const asset = bundle.assets[id];
    const wrap = el("figure", "figure-cell");
    wrap.appendChild(assetCanvas(asset.ppm_base64, "asset-image"));
    wrap.appendChild(el("figcaption", undefined, asset.label));
    strip.appendChild(wrap);
  }
  section.appendChild(strip);
}

// --- slice 2: embedding model (hover + compare) -----------------------------

function buildEmbedding(
  bundle: StoryBundle,
  section: HTMLElement,
  state: UiState,
): CompareController {
  const payload = payloadOf<EmbeddingPayload>(bundle, 1);

  const overlay = el("div", "internals-overlay hidden", payload.architecture_text);
  section.appendChild(overlay);

  const viewport = el("div", "compare-viewport");
  const before = el("div", "compare-layer before-layer");
  const cols = Math.max(...payload.before_grid.map((c) => c.col)) + 1;
  before.style.setProperty("--grid-cols", String(cols));
  for (const cell of payload.before_grid) {
    const asset = bundle.assets[cell.asset_id];
    const cellNode = el("div", "sample-cell");
    cellNode.tabIndex = 0;
    cellNode.dataset.assetId = cell.asset_id;
    cellNode.style.gridRow = String(cell.row + 1);
    cellNode.style.gridColumn = String(cell.col + 1);
    cellNode.appendChild(assetCanvas(asset.ppm_base64, "asset-image"));
    const show = () => overlay.classList.remove("hidden");
    const hide = () => overlay.classList.add("hidden");
    cellNode.addEventListener("mouseenter", show);
    cellNode.addEventListener("mouseleave", hide);
    cellNode.addEventListener("focus", show);
    cellNode.addEventListener("blur", hide);
    before.appendChild(cellNode);
  }

  const after = el("div", "compare-layer after-layer");
  const afterScene = scene("embedding-scene");
  for (const bubble of payload.after_bubbles) {
    afterScene.appendChild(bubbleCircle(bubble, "embed-bubble"));
  }
  after.appendChild(afterScene);

  const divider = el("div", "compare-divider");
  viewport.append(before, after, divider);
  section.appendChild(viewport);

  const slider = el("input", "compare-slider") as HTMLInputElement;
  slider.type = "range";
  slider.min = "0";
  slider.max = "100";
  slider.step = "1";
  section.appendChild(slider);

  const apply = (position: number) => {
    const p = Math.min(100, Math.max(0, position));
    state.comparePosition = p;
    // p is the reveal of the "after" layer: 0 shows only the grid of
    // images, 100 shows only the bubbles
    after.style.clipPath = `inset(0 ${100 - p}% 0 0)`;
    before.style.clipPath = `inset(0 0 0 ${p}%)`;
    divider.style.left = `${p}%`;
    slider.value = String(p);
  };
  slider.addEventListener("input", () => apply(Number(slider.value)));
  apply(state.comparePosition);

  return { set: apply, position: () => state.comparePosition };
}

// --- slice 3: euclidean distance (line hover) -------------------------------

function buildDistance(bundle: StoryBundle, section: HTMLElement): void {
  const payload = payloadOf<DistancePayload>(bundle, 2);
  section.appendChild(el("p", "formula", payload.formula_text));

  const tooltip = el("div", "line-tooltip hidden");
  section.appendChild(tooltip);

  const svg = scene("distance-scene");
  const points: Record<string, Point> = {
    anchor: [payload.bubbles.anchor.x, payload.bubbles.anchor.y],
    positive: [payload.bubbles.positive.x, payload.bubbles.positive.y],
    negative: [payload.bubbles.negative.x, payload.bubbles.negative.y],
  };
  const idToRole: Record<string, string> = {
    [payload.bubbles.anchor.id]: "anchor",
    [payload.bubbles.positive.id]: "positive",
    [payload.bubbles.negative.id]: "negative",
  };
  for (const line of payload.lines) {
    const from = points[idToRole[line.from]];
    const to = points[idToRole[line.to]];
    const node = svgEl("line", {
      class: `distance-line ${line.role}`,
      x1: from[0],
      y1: from[1],
      x2: to[0],
      y2: to[1],
      stroke: line.role === "anchor-positive" ? "#2E7D32" : "#C62828",
      "stroke-width": 0.02,
    });
    node.dataset.role = line.role;
    node.addEventListener("mouseenter", () => {
      const d = dist2d(from, to);
      tooltip.textContent =
        `${line.role}: d = sqrt((xa-xb)^2 + (ya-yb)^2) = ${d.toFixed(4)}`;
      tooltip.dataset.distance = String(d);
      tooltip.classList.remove("hidden");
    });
    node.addEventListener("mouseleave", () => tooltip.classList.add("hidden"));
    svg.appendChild(node);
  }
  for (const role of ["anchor", "positive", "negative"] as const) {
    const bubble = payload.bubbles[role];
    const circle = bubbleCircle(bubble, `triplet-bubble ${role}`);
    svg.appendChild(circle);
  }
  section.appendChild(svg);
}

// --- slice 4: draggable loss -------------------------------------------------

function formatLoss(value: number): string {
  return value.toFixed(4);
}

function buildLoss(
  bundle: StoryBundle,
  section: HTMLElement,
  state: UiState,
): LossController {
  const payload = payloadOf<LossPayload>(bundle, 3);
  state.margin = payload.margin_default;
  const coords: Record<"anchor" | "positive" | "negative", [number, number]> = {
    anchor: [payload.bubbles.anchor.x, payload.bubbles.anchor.y],
    positive: [payload.bubbles.positive.x, payload.bubbles.positive.y],
    negative: [payload.bubbles.negative.x, payload.bubbles.negative.y],
  };

  const readout = el("div", "loss-readout");
  readout.dataset.lossKind = payload.loss_kind;
  const marginLabel = el("label", "margin-label", "margin");
  const slider = el("input", "margin-slider") as HTMLInputElement;
  slider.type = "range";
  slider.min = String(payload.margin_range[0]);
  slider.max = String(payload.margin_range[1]);
  slider.step = "0.01";
  slider.value = String(payload.margin_default);
  marginLabel.appendChild(slider);

  const svg = scene("loss-scene");
  const circles: Record<string, SVGCircleElement> = {};
  for (const role of ["anchor", "positive", "negative"] as const) {
    const circle = bubbleCircle(payload.bubbles[role], `loss-bubble ${role}`, 0.06);
    circle.dataset.role = role;
    circles[role] = circle;
    svg.appendChild(circle);
  }

  const currentLoss = () =>
    tripletLoss2d(coords.anchor, coords.positive, coords.negative, state.margin);

  const refresh = () => {
    const loss = currentLoss();
    readout.dataset.loss = String(loss);
    readout.textContent = `loss = ${formatLoss(loss)} (margin ${state.margin.toFixed(2)})`;
  };

  const controller: LossController = {
    moveBubble(role, x, y) {
      coords[role] = [x, y];
      circles[role].setAttribute("cx", String(x));
      circles[role].setAttribute("cy", String(y));
      refresh();
    },
    setMargin(margin) {
      state.margin = margin;
      slider.value = String(margin);
      refresh();
    },
    currentLoss,
  };

  slider.addEventListener("input", () => controller.setMargin(Number(slider.value)));

  // pointer dragging: pixel deltas map to scene units via the viewport
  // scale; environments without layout (zero-size rects) skip the wiring
  let dragging: "anchor" | "positive" | "negative" | null = null;
  svg.addEventListener("pointerdown", (event) => {
    const target = event.target as SVGElement;
    const role = target.dataset?.role as typeof dragging;
    if (role) {
      dragging = role;
      (target as Element & { setPointerCapture?: (id: number) => void })
        .setPointerCapture?.(event.pointerId);
    }
  });
  svg.addEventListener("pointermove", (event) => {
    if (!dragging) return;
    const rect = svg.getBoundingClientRect();
    if (rect.width <= 0 || rect.height <= 0) return;
    const x = ((event.clientX - rect.left) / rect.width) * 2.2 - 1.1;
    const y = ((event.clientY - rect.top) / rect.height) * 2.2 - 1.1;
    controller.moveBubble(dragging, x, y);
  });
  svg.addEventListener("pointerup", () => {
    dragging = null;
  });

  section.append(readout, marginLabel, svg);
  refresh();
  return controller;
}

// --- slice 5: training animation ---------------------------------------------

function buildTraining(
  bundle: StoryBundle,
  section: HTMLElement,
): AnimationController {
  const payload = payloadOf<TrainingPayload>(bundle, 4);
  const frames = payload.frames;

  const button = el("button", "play-toggle", "play");
  const frameLabel = el("span", "frame-label");
  const controls = el("div", "training-controls");
  controls.append(button, frameLabel);

  const svg = scene("training-scene");
  const circles = frames[0].bubbles.map((bubble) => {
    const circle = bubbleCircle(bubble, "training-bubble", 0.035);
    svg.appendChild(circle);
    return circle;
  });

  const tooltip = el("div", "bubble-tooltip hidden");
  circles.forEach((circle, i) => {
    circle.addEventListener("mouseenter", () => {
      const id = frames[0].bubbles[i].id;
      const asset = bundle.assets[id];
      tooltip.replaceChildren(assetCanvas(asset.ppm_base64, "asset-image"));
      tooltip.appendChild(el("span", undefined, `${id} (${asset.label})`));
      tooltip.classList.remove("hidden");
    });
    circle.addEventListener("mouseleave", () => tooltip.classList.add("hidden"));
  });

  // loss curve with a cursor column tracking the current frame
  const curve = svgEl("svg", {
    class: "loss-curve",
    viewBox: "0 -2 104 44",
    preserveAspectRatio: "none",
  });
  const maxLoss = Math.max(...payload.loss_curve, 1e-12);
  const stepX = payload.loss_curve.length > 1 ? 100 / (payload.loss_curve.length - 1) : 0;
  const pointStr = payload.loss_curve
    .map((loss, i) => `${(i * stepX).toFixed(3)},${(40 - (loss / maxLoss) * 38).toFixed(3)}`)
    .join(" ");
  curve.appendChild(
    svgEl("polyline", {
      class: "curve-line",
      points: pointStr,
      fill: "none",
      stroke: "#5C4033",
      "stroke-width": 0.8,
    }),
  );
  const cursor = svgEl("line", {
    class: "curve-cursor",
    x1: 0, y1: 0, x2: 0, y2: 40,
    stroke: "#C62828",
    "stroke-width": 0.6,
  });
  curve.appendChild(cursor);

  const showFrame = (index: number) => {
    const frame = frames[index];
    frame.bubbles.forEach((bubble, i) => {
      circles[i].setAttribute("cx", String(bubble.x));
      circles[i].setAttribute("cy", String(bubble.y));
    });
    frameLabel.textContent =
      `epoch ${frame.epoch} | loss ${frame.loss.toFixed(4)}`;
    cursor.setAttribute("x1", String(index * stepX));
    cursor.setAttribute("x2", String(index * stepX));
    cursor.dataset.frame = String(index);
  };

  const animation = new AnimationController(frames.length, showFrame);
  button.addEventListener("click", () => {
    animation.toggle();
    button.textContent = animation.playing ? "pause" : "play";
  });

  section.append(controls, svg, tooltip, curve);
  showFrame(0);
  return animation;
}

// --- slice 6: inference dropzone ----------------------------------------------

function buildInference(
  bundle: StoryBundle,
  section: HTMLElement,
  state: UiState,
): InferenceController {
  const payload = payloadOf<InferencePayload>(bundle, 5);
  const queryAsset = bundle.assets[payload.query_asset_id];

  const thumb = el("div", "query-thumb");
  thumb.draggable = true;
  thumb.appendChild(assetCanvas(queryAsset.ppm_base64, "asset-image"));
  thumb.appendChild(el("span", undefined, "drag the test image into the space"));

  const dropzone = el("div", "inference-dropzone");
  const svg = scene("inference-scene");
  const [qx, qy] = payload.query_coords;
  const radiusCircle = svgEl("circle", {
    class: "radius-circle hidden",
    cx: qx, cy: qy, r: payload.radius,
    fill: "none",
    stroke: QUERY_COLOR,
    "stroke-width": 0.012,
  });
  const testBubble = svgEl("circle", {
    class: "test-bubble hidden",
    cx: qx, cy: qy, r: 0.055,
    fill: QUERY_COLOR,
  });
  svg.append(radiusCircle, testBubble);
  dropzone.appendChild(svg);

  const bars = el("div", "distance-bars hidden");
  const maxDistance = Math.max(...payload.neighbors.map((n) => n.distance), 1e-12);
  for (const neighbor of payload.neighbors) {
    const bar = el("div", "bar");
    bar.dataset.neighborId = neighbor.id;
    bar.dataset.distance = String(neighbor.distance);
    bar.style.height = `${(neighbor.distance / maxDistance) * 120 + 4}px`;
    bar.title = `${neighbor.id}: ${neighbor.distance.toFixed(4)}`;
    bars.appendChild(bar);
  }

  const strip = el("div", "neighbor-strip hidden");
  for (const neighbor of payload.neighbors) {
    const asset = bundle.assets[neighbor.id];
    if (!asset) continue;
    const cell = el("figure", "neighbor-cell");
    cell.appendChild(assetCanvas(asset.ppm_base64, "asset-image"));
    cell.appendChild(el("figcaption", undefined, neighbor.distance.toFixed(3)));
    strip.appendChild(cell);
  }

  const sync = () => {
    testBubble.classList.toggle("hidden", !state.dropped);
    radiusCircle.classList.toggle("hidden", !(state.dropped && state.circleVisible));
    bars.classList.toggle("hidden", !state.dropped);
    strip.classList.toggle("hidden", !(state.dropped && state.circleVisible));
  };

  const controller: InferenceController = {
    drop() {
      state.dropped = true;
      state.circleVisible = true;
      sync();
    },
    toggleCircle() {
      if (!state.dropped) return;
      state.circleVisible = !state.circleVisible;
      sync();
    },
    dropped: () => state.dropped,
    circleVisible: () => state.dropped && state.circleVisible,
  };

  thumb.addEventListener("dragstart", (event) => {
    event.dataTransfer?.setData("text/plain", payload.query_asset_id);
  });
  dropzone.addEventListener("dragover", (event) => event.preventDefault());
  dropzone.addEventListener("drop", (event) => {
    event.preventDefault();
    controller.drop();
  });
  testBubble.addEventListener("click", () => controller.toggleCircle());

  section.append(thumb, dropzone, bars, strip);
  sync();
  return controller;
}

// --- quiz (optional trailing section, not a scroll step) -----------------------

function buildQuiz(questions: QuizQuestion[], root: HTMLElement): void {
  const section = el("section", "quiz");
  section.appendChild(el("h2", "slice-title", "Check what stuck"));
  questions.forEach((question, qi) => {
    const block = el("div", "quiz-question");
    block.appendChild(el("p", "quiz-prompt", `${qi + 1}. ${question.prompt}`));
    const feedback = el("p", "quiz-feedback");
    question.choices.forEach((choice, ci) => {
      const button = el("button", "quiz-choice", choice);
      button.addEventListener("click", () => {
        const right = ci === question.answer_index;
        feedback.textContent = right
          ? "Correct!"
          : `Not quite: ${question.choices[question.answer_index]}`;
        feedback.className = `quiz-feedback ${right ? "right" : "wrong"}`;
      });
      block.appendChild(button);
    });
    block.appendChild(feedback);
    section.appendChild(block);
  });
  root.appendChild(section);
}

const SLICE_TITLES: Record<string, string> = {
  snn_concept: "Twins with shared weights",
  embedding_model: "From pixels to a point in space",
  euclidean_distance: "How far apart are two images?",
  loss_function: "The margin game",
  training: "Watch the space organize itself",
  inferencing: "A new image walks in",
};

export function renderBundle(bundle: StoryBundle, root: HTMLElement): RenderResult {
  root.replaceChildren();
  const state = initialState(0);
  const main = el("main", "story");
  main.dataset.scrollMode = bundle.scroll_mode;

  const sections = bundle.slices.map((slice, i) =>
    sliceSection(i, slice.id, SLICE_TITLES[slice.id] ?? slice.id),
  );

  buildConcept(bundle, sections[0]);
  const compare = buildEmbedding(bundle, sections[1], state);
  buildDistance(bundle, sections[2]);
  const loss = buildLoss(bundle, sections[3], state);
  const animation = buildTraining(bundle, sections[4]);
  const inference = buildInference(bundle, sections[5], state);

  sections.forEach((section) => main.appendChild(section));
  root.appendChild(main);
  if (bundle.quiz) {
    buildQuiz(bundle.quiz, main);
  }

  const steps = new StepController(sections, (index) => {
    state.activeSlice = index;
  });
  return { sections, steps, state, compare, loss, animation, inference };
}
