// Interaction state shared by the slices, plus the training animation
// clock. The UI never mutates bundle data; all live values sit here.

export interface UiState {
  activeSlice: number; // 0..5, advanced only by scroll steps
  comparePosition: number; // 0..100, divider of the before/after view
  margin: number;
  dropped: boolean;
  circleVisible: boolean;
}

export function initialState(margin: number): UiState {
  return {
    activeSlice: -1,
    comparePosition: 50,
    margin,
    dropped: false,
    circleVisible: true,
  };
}

type FrameListener = (frame: number) => void;

/**
 * Play/pause clock over the projection frames. Pausing freezes the
 * current frame; resuming continues from that exact frame rather than
 * restarting, and playback wraps at the end.
 */
export class AnimationController {
  private timer: ReturnType<typeof setInterval> | null = null;
  private frameIndex = 0;

  constructor(
    public readonly frameCount: number,
    private readonly onFrame: FrameListener,
    private readonly intervalMs = 400,
  ) {
    if (frameCount < 1) throw new Error("need at least one frame");
  }

  get frame(): number {
    return this.frameIndex;
  }

  get playing(): boolean {
    return this.timer !== null;
  }

  seek(frame: number): void {
    if (frame < 0 || frame >= this.frameCount) {
      throw new Error(`frame ${frame} out of range`);
    }
    this.frameIndex = frame;
    this.onFrame(this.frameIndex);
  }

  step(): void {
    this.frameIndex = (this.frameIndex + 1) % this.frameCount;
    this.onFrame(this.frameIndex);
  }

  play(): void {
    if (this.timer !== null) return;
    this.timer = setInterval(() => this.step(), this.intervalMs);
  }

  pause(): void {
    if (this.timer === null) return;
    clearInterval(this.timer);
    this.timer = null;
  }

  toggle(): void {
    this.playing ? this.pause() : this.play();
  }
}
