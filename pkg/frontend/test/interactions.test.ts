import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { tripletLoss2d } from "../src/math";
import { renderBundle, type RenderResult } from "../src/render";
import type {
  InferencePayload,
  LossPayload,
  StoryBundle,
  TrainingPayload,
} from "../src/types";
import bundleDoc from "./fixtures/bundle.json";

const bundle = bundleDoc as unknown as StoryBundle;
const lossPayload = bundle.slices[3].payload as LossPayload;
const trainingPayload = bundle.slices[4].payload as TrainingPayload;
const inferencePayload = bundle.slices[5].payload as InferencePayload;

let root: HTMLElement;
let result: RenderResult;

beforeEach(() => {
  document.body.innerHTML = '<div id="app"></div>';
  root = document.getElementById("app")!;
  result = renderBundle(bundle, root);
});

describe("embedding model hover overlay", () => {
  it("appears on hover and hides on leave", () => {
    const overlay = root.querySelector(".internals-overlay")!;
    const cell = root.querySelector(".sample-cell")!;
    expect(overlay.classList.contains("hidden")).toBe(true);
    cell.dispatchEvent(new Event("mouseenter"));
    expect(overlay.classList.contains("hidden")).toBe(false);
    cell.dispatchEvent(new Event("mouseleave"));
    expect(overlay.classList.contains("hidden")).toBe(true);
  });

  it("treats keyboard focus like hover", () => {
    const overlay = root.querySelector(".internals-overlay")!;
    const cell = root.querySelector(".sample-cell")!;
    cell.dispatchEvent(new Event("focus"));
    expect(overlay.classList.contains("hidden")).toBe(false);
    cell.dispatchEvent(new Event("blur"));
    expect(overlay.classList.contains("hidden")).toBe(true);
  });
});

describe("before/after comparison", () => {
  it("shows only the before layer at 0%", () => {
    result.compare.set(0);
    const before = root.querySelector(".before-layer") as HTMLElement;
    const after = root.querySelector(".after-layer") as HTMLElement;
    expect(before.style.clipPath).toBe("inset(0 0 0 0%)");
    expect(after.style.clipPath).toBe("inset(0 100% 0 0)");
  });

  it("shows only the after layer at 100%", () => {
    result.compare.set(100);
    const before = root.querySelector(".before-layer") as HTMLElement;
    const after = root.querySelector(".after-layer") as HTMLElement;
    expect(before.style.clipPath).toBe("inset(0 0 0 100%)");
    expect(after.style.clipPath).toBe("inset(0 0% 0 0)");
  });

  it("clips proportionally in between and follows the slider", () => {
    const slider = root.querySelector(".compare-slider") as HTMLInputElement;
    slider.value = "25";
    slider.dispatchEvent(new Event("input"));
    expect(result.compare.position()).toBe(25);
    const after = root.querySelector(".after-layer") as HTMLElement;
    expect(after.style.clipPath).toBe("inset(0 75% 0 0)");
    const divider = root.querySelector(".compare-divider") as HTMLElement;
    expect(divider.style.left).toBe("25%");
  });
});

describe("distance line hover", () => {
  it("shows the live value computed from the 2d coordinates", () => {
    const tooltip = root.querySelector(".line-tooltip")!;
    const line = root.querySelector(
      '.distance-line[data-role="anchor-positive"]',
    )!;
    expect(tooltip.classList.contains("hidden")).toBe(true);
    line.dispatchEvent(new Event("mouseenter"));
    expect(tooltip.classList.contains("hidden")).toBe(false);

    const b = (bundle.slices[2].payload as LossPayload).bubbles;
    const expected = Math.sqrt(
      (b.anchor.x - b.positive.x) ** 2 + (b.anchor.y - b.positive.y) ** 2,
    );
    expect(Number((tooltip as HTMLElement).dataset.distance)).toBeCloseTo(expected, 12);
    expect(tooltip.textContent).toContain(expected.toFixed(4));

    line.dispatchEvent(new Event("mouseleave"));
    expect(tooltip.classList.contains("hidden")).toBe(true);
  });

  it("handles the anchor-negative line too", () => {
    const tooltip = root.querySelector(".line-tooltip") as HTMLElement;
    const line = root.querySelector('.distance-line[data-role="anchor-negative"]')!;
    line.dispatchEvent(new Event("mouseenter"));
    const b = (bundle.slices[2].payload as LossPayload).bubbles;
    const expected = Math.sqrt(
      (b.anchor.x - b.negative.x) ** 2 + (b.anchor.y - b.negative.y) ** 2,
    );
    expect(Number(tooltip.dataset.distance)).toBeCloseTo(expected, 12);
  });
});

describe("draggable loss slice", () => {
  it("starts at the bundle's precomputed initial loss", () => {
    expect(Math.abs(result.loss.currentLoss() - lossPayload.initial_loss))
      .toBeLessThanOrEqual(1e-9);
    const readout = root.querySelector(".loss-readout") as HTMLElement;
    expect(Number(readout.dataset.loss)).toBeCloseTo(lossPayload.initial_loss, 9);
  });

  it("drops to zero when the positive sits on the anchor and the negative is far", () => {
    const a = lossPayload.bubbles.anchor;
    result.loss.moveBubble("positive", a.x, a.y);
    result.loss.moveBubble("negative", a.x + 50, a.y + 50);
    expect(result.loss.currentLoss()).toBe(0);
    const readout = root.querySelector(".loss-readout") as HTMLElement;
    expect(readout.textContent).toContain("0.0000");
  });

  it("recomputes live while the margin slider moves", () => {
    const slider = root.querySelector(".margin-slider") as HTMLInputElement;
    slider.value = "5";
    slider.dispatchEvent(new Event("input"));
    const b = lossPayload.bubbles;
    const expected = tripletLoss2d(
      [b.anchor.x, b.anchor.y],
      [b.positive.x, b.positive.y],
      [b.negative.x, b.negative.y],
      5,
    );
    expect(result.loss.currentLoss()).toBeCloseTo(expected, 12);
  });

  it("moves the svg circle with the bubble", () => {
    result.loss.moveBubble("anchor", 0.25, -0.5);
    const circle = root.querySelector('.loss-bubble[data-role="anchor"]')!;
    expect(circle.getAttribute("cx")).toBe("0.25");
    expect(circle.getAttribute("cy")).toBe("-0.5");
  });

  it("matches the slider's declared range", () => {
    const slider = root.querySelector(".margin-slider") as HTMLInputElement;
    expect([slider.min, slider.max]).toEqual(["0", "5"]);
  });
});

describe("training animation", () => {
  afterEach(() => {
    result.animation.pause();
    vi.useRealTimers();
  });

  it("steps through frames and resumes where it paused", () => {
    vi.useFakeTimers();
    const button = root.querySelector(".play-toggle") as HTMLButtonElement;
    button.click();
    expect(result.animation.playing).toBe(true);
    vi.advanceTimersByTime(1200); // 3 ticks at 400ms
    expect(result.animation.frame).toBe(3);

    button.click(); // pause
    expect(result.animation.playing).toBe(false);
    vi.advanceTimersByTime(2000);
    expect(result.animation.frame).toBe(3); // frozen while paused

    button.click(); // resume: picks up from frame 3, not from the start
    vi.advanceTimersByTime(400);
    expect(result.animation.frame).toBe(4);
  });

  it("keeps the loss-curve cursor on the current frame", () => {
    const cursor = root.querySelector(".curve-cursor") as SVGLineElement;
    expect(cursor.dataset.frame).toBe("0");
    result.animation.seek(2);
    expect(cursor.dataset.frame).toBe("2");
    const stepX = 100 / (trainingPayload.loss_curve.length - 1);
    expect(Number(cursor.getAttribute("x1"))).toBeCloseTo(2 * stepX, 9);
  });

  it("wraps around at the last frame", () => {
    result.animation.seek(trainingPayload.frames.length - 1);
    result.animation.step();
    expect(result.animation.frame).toBe(0);
  });

  it("reveals the source image when hovering a bubble", () => {
    const tooltip = root.querySelector(".bubble-tooltip")!;
    const circle = root.querySelector(".training-bubble")!;
    expect(tooltip.classList.contains("hidden")).toBe(true);
    circle.dispatchEvent(new Event("mouseenter"));
    expect(tooltip.classList.contains("hidden")).toBe(false);
    expect(tooltip.querySelector("canvas")).not.toBeNull();
    circle.dispatchEvent(new Event("mouseleave"));
    expect(tooltip.classList.contains("hidden")).toBe(true);
  });

  it("updates bubble positions when the frame changes", () => {
    const last = trainingPayload.frames.length - 1;
    result.animation.seek(last);
    const circle = root.querySelector(".training-bubble")!;
    expect(Number(circle.getAttribute("cx"))).toBeCloseTo(
      trainingPayload.frames[last].bubbles[0].x,
      12,
    );
  });
});

describe("inference dropzone", () => {
  it("hides the test bubble until the image is dropped", () => {
    expect(result.inference.dropped()).toBe(false);
    expect(
      root.querySelector(".test-bubble")!.classList.contains("hidden"),
    ).toBe(true);
  });

  it("drop shows the bubble, the radius circle, and k ascending bars", () => {
    const dropzone = root.querySelector(".inference-dropzone")!;
    dropzone.dispatchEvent(new Event("drop"));
    expect(result.inference.dropped()).toBe(true);

    const testBubble = root.querySelector(".test-bubble")!;
    expect(testBubble.classList.contains("hidden")).toBe(false);
    expect(Number(testBubble.getAttribute("cx"))).toBeCloseTo(
      inferencePayload.query_coords[0],
      12,
    );

    const circle = root.querySelector(".radius-circle")!;
    expect(circle.classList.contains("hidden")).toBe(false);
    expect(Number(circle.getAttribute("r"))).toBeCloseTo(inferencePayload.radius, 12);

    const bars = [...root.querySelectorAll(".distance-bars .bar")] as HTMLElement[];
    expect(bars).toHaveLength(
      Math.min(inferencePayload.k, inferencePayload.neighbors.length),
    );
    const distances = bars.map((b) => Number(b.dataset.distance));
    expect([...distances].sort((x, y) => x - y)).toEqual(distances);
  });

  it("clicking the test bubble toggles the circle and neighbor strip", () => {
    root.querySelector(".inference-dropzone")!.dispatchEvent(new Event("drop"));
    const testBubble = root.querySelector(".test-bubble")!;
    const circle = root.querySelector(".radius-circle")!;
    const strip = root.querySelector(".neighbor-strip")!;
    expect(circle.classList.contains("hidden")).toBe(false);

    testBubble.dispatchEvent(new MouseEvent("click"));
    expect(circle.classList.contains("hidden")).toBe(true);
    expect(strip.classList.contains("hidden")).toBe(true);

    testBubble.dispatchEvent(new MouseEvent("click"));
    expect(circle.classList.contains("hidden")).toBe(false);
    expect(result.inference.circleVisible()).toBe(true);
  });

  it("ignores circle toggles before any drop", () => {
    result.inference.toggleCircle();
    expect(result.inference.circleVisible()).toBe(false);
  });
});
