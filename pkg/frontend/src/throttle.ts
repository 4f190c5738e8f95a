/** Trailing-edge rate limiter used by the drag loop.
 *
 * Guarantees at most one call per `minIntervalMs`; a call arriving inside
 * the window is deferred to the window's end (latest invocation wins).
 * `flush()` runs a pending trailing call immediately, `cancel()` drops it.
 */

export interface Throttled {
  (): void;
  flush(): void;
  cancel(): void;
  pending(): boolean;
}

export function throttle(fn: () => void, minIntervalMs: number): Throttled {
  let lastRun = Number.NEGATIVE_INFINITY;
  let timer: ReturnType<typeof setTimeout> | null = null;

  const run = () => {
    lastRun = Date.now();
    fn();
  };

  const throttled = (() => {
    if (timer !== null) return; // trailing call already scheduled
    const wait = minIntervalMs - (Date.now() - lastRun);
    if (wait <= 0) {
      run();
    } else {
      timer = setTimeout(() => {
        timer = null;
        run();
      }, wait);
    }
  }) as Throttled;

  throttled.flush = () => {
    if (timer !== null) {
      clearTimeout(timer);
      timer = null;
      run();
    }
  };

  throttled.cancel = () => {
    if (timer !== null) {
      clearTimeout(timer);
      timer = null;
    }
  };

  throttled.pending = () => timer !== null;

  return throttled;
}
