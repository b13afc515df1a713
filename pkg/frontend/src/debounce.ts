/**
 * Trailing-edge debouncer for preview requests.
 *
 * Calls are coalesced so at most one runs per interval (250 ms keeps the
 * service under four requests a second), and a newer run aborts the
 * previous in-flight one through its AbortSignal.
 */
export class PreviewScheduler {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private inflight: AbortController | null = null;

  constructor(
    private readonly run: (signal: AbortSignal) => Promise<void>,
    private readonly intervalMs = 250,
  ) {}

  /** Schedule a run; repeated calls within the interval collapse into one. */
  request(): void {
    if (this.timer !== null) {
      return;
    }
    this.timer = setTimeout(() => {
      this.timer = null;
      this.fire();
    }, this.intervalMs);
  }

  private fire(): void {
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    void this.run(controller.signal).finally(() => {
      if (this.inflight === controller) {
        this.inflight = null;
      }
    });
  }

  dispose(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    this.inflight?.abort();
    this.inflight = null;
  }
}
