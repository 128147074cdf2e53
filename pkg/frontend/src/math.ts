// The only two formulas the UI computes itself; everything else is read
// from the bundle. Both are covered by the backend-emitted parity fixture
// to 1e-9, which makes this file the whole numerical trust surface.

export type Point = readonly [number, number];

export function dist2d(a: Point, b: Point): number {
  const dx = a[0] - b[0];
  const dy = a[1] - b[1];
  return Math.sqrt(dx * dx + dy * dy);
}

/**
 * Squared-distance triplet hinge: max(0, d(a,p)^2 - d(a,n)^2 + margin).
 * Squared distances are formed directly (no sqrt round-trip) so the
 * arithmetic matches the backend bit for bit.
 */
export function tripletLoss2d(
  anchor: Point,
  positive: Point,
  negative: Point,
  margin: number,
): number {
  const dxp = anchor[0] - positive[0];
  const dyp = anchor[1] - positive[1];
  const dxn = anchor[0] - negative[0];
  const dyn = anchor[1] - negative[1];
  const dap2 = dxp * dxp + dyp * dyp;
  const dan2 = dxn * dxn + dyn * dyn;
  return Math.max(0, dap2 - dan2 + margin);
}
