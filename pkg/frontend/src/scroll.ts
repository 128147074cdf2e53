// Scroll-as-steps: one slice is active at a time and activation follows
// section visibility. The observer wiring is separated from the step
// logic so tests (and environments without IntersectionObserver) can
// drive steps directly.

export class StepController {
  private activeIndex = -1;

  constructor(
    private readonly sections: HTMLElement[],
    private readonly onChange: (index: number) => void = () => {},
  ) {}

  get active(): number {
    return this.activeIndex;
  }

  /** Mark section `index` as the visible step. Idempotent per index. */
  notifyVisible(index: number): void {
    if (index === this.activeIndex || index < 0 || index >= this.sections.length) {
      return;
    }
    this.activeIndex = index;
    this.sections.forEach((section, i) => {
      section.classList.toggle("active", i === index);
    });
    this.onChange(index);
  }

  /** Hook up an IntersectionObserver when the environment provides one. */
  attach(): void {
    if (typeof IntersectionObserver === "undefined") {
      this.notifyVisible(0);
      return;
    }
    const observer = new IntersectionObserver(
      (entries) => {
        for (const entry of entries) {
          if (entry.isIntersecting) {
            this.notifyVisible(this.sections.indexOf(entry.target as HTMLElement));
          }
        }
      },
      { threshold: 0.5 },
    );
    this.sections.forEach((section) => observer.observe(section));
  }
}

/** #slice-<n> deep links scroll the matching section into view. */
export function applyDeepLink(hash: string, sections: HTMLElement[]): number {
  const match = /^#slice-([1-6])$/.exec(hash);
  if (!match) return -1;
  const index = parseInt(match[1], 10) - 1;
  sections[index]?.scrollIntoView?.({ behavior: "auto" });
  return index;
}
