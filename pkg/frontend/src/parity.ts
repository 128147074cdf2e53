// Runtime self-check against the backend-emitted loss fixtures: if the
// live formula ever drifts from the backend, the story page says so
// instead of quietly showing different numbers.

import { tripletLoss2d } from "./math";
import type { ParityCase } from "./types";

export const PARITY_TOLERANCE = 1e-9;

export function verifyParityCases(cases: ParityCase[]): boolean {
  return cases.every(
    (c) =>
      Math.abs(tripletLoss2d(c.anchor, c.positive, c.negative, c.margin) - c.loss) <=
      PARITY_TOLERANCE,
  );
}
