/** Interval poller that skips a tick while the previous fetch is in flight,
 * so slow responses never stack concurrent requests for the same resource.
 */
export class Poller {
  private timer: number | null = null;
  private busy = false;

  constructor(
    private readonly intervalMillis: number,
    private readonly tick: () => Promise<void>,
  ) {}

  start(): void {
    if (this.timer !== null) return;
    void this.run();
    this.timer = window.setInterval(() => void this.run(), this.intervalMillis);
  }

  stop(): void {
    if (this.timer !== null) {
      window.clearInterval(this.timer);
      this.timer = null;
    }
  }

  private async run(): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    try {
      await this.tick();
    } catch {
      // transient poll errors surface on the next manual action
    } finally {
      this.busy = false;
    }
  }
}
