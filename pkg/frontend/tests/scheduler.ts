import type { Scheduler } from "../src/core/controller.js";

/** Manual-clock scheduler so debounce and playback run under test control. */
export class VirtualScheduler implements Scheduler {
  now = 0;
  private nextId = 1;
  private tasks: { id: number; at: number; fn: () => void }[] = [];

  set(fn: () => void, ms: number): number {
    const id = this.nextId++;
    this.tasks.push({ id, at: this.now + ms, fn });
    return id;
  }

  clear(id: number): void {
    this.tasks = this.tasks.filter((t) => t.id !== id);
  }

  advance(ms: number): void {
    const target = this.now + ms;
    for (;;) {
      const due = this.tasks
        .filter((t) => t.at <= target)
        .sort((a, b) => a.at - b.at || a.id - b.id)[0];
      if (!due) break;
      this.now = due.at;
      this.tasks = this.tasks.filter((t) => t.id !== due.id);
      due.fn();
    }
    this.now = target;
  }

  pendingCount(): number {
    return this.tasks.length;
  }
}
