/** Session flow: fetch next, submit through the outbox, auto-advance.
 *
 * Progress shown to the rater always comes from service responses,
 * never from a local counter, so the display cannot drift from the
 * service-side judgment count.  A judgment the service has not
 * acknowledged blocks advance; transient failures park it in the
 * outbox and retry until the acknowledgement lands.
 */

import { ServiceError, type RatingClient } from './api'
import type { JudgmentOutbox } from './outbox'
import type { Progress, RatingItemView } from './types'

export type Phase = 'connecting' | 'rating' | 'done' | 'unreachable'

export interface Reveal {
  item: RatingItemView
  correct: boolean
}

export interface SessionSnapshot {
  phase: Phase
  item: RatingItemView | null
  /** True while a judgment is unacknowledged (in flight or held); blocks new ones. */
  busy: boolean
  held: number
  progress: Progress | null
  lastJudged: Reveal | null
  notice: string | null
}

export interface SessionOptions {
  retryMs?: number
}

export class SessionController {
  private phase: Phase = 'connecting'
  private item: RatingItemView | null = null
  private inFlight = false
  private progress: Progress | null = null
  private lastJudged: Reveal | null = null
  private pendingReveal: Reveal | null = null
  private notice: string | null = null
  private retryTimer: ReturnType<typeof setTimeout> | null = null
  private destroyed = false
  private readonly retryMs: number

  constructor(
    private readonly api: RatingClient,
    private readonly outbox: JudgmentOutbox,
    private readonly onChange: (snapshot: SessionSnapshot) => void,
    options: SessionOptions = {},
  ) {
    this.retryMs = options.retryMs ?? 2000
  }

  snapshot(): SessionSnapshot {
    return {
      phase: this.phase,
      item: this.item,
      busy: this.inFlight || (this.item !== null && this.outbox.has(this.item.item_id)),
      held: this.outbox.size,
      progress: this.progress,
      lastJudged: this.lastJudged,
      notice: this.notice,
    }
  }

  /** Deliver anything a previous page load left behind, then resume. */
  async start(): Promise<void> {
    this.emit()
    if (await this.flush()) {
      await this.advance()
    }
  }

  judge(correct: boolean): void {
    if (this.destroyed || this.phase !== 'rating' || this.item === null) return
    if (this.inFlight || this.outbox.has(this.item.item_id)) return
    this.pendingReveal = { item: this.item, correct }
    this.outbox.enqueue({ item_id: this.item.item_id, correct })
    this.inFlight = true
    this.emit()
    void this.deliverThenAdvance()
  }

  /** Manual retry, also fired by the timer after a transient failure. */
  async retryNow(): Promise<void> {
    if (this.destroyed || this.inFlight) return
    this.clearRetryTimer()
    this.inFlight = true
    this.emit()
    await this.deliverThenAdvance()
  }

  destroy(): void {
    this.destroyed = true
    this.clearRetryTimer()
  }

  private async deliverThenAdvance(): Promise<void> {
    const delivered = await this.flush()
    this.inFlight = false
    if (delivered) {
      await this.advance()
    }
  }

  /** Post every outbox entry in order. False means a transient failure
   * left entries queued and a retry is scheduled. */
  private async flush(): Promise<boolean> {
    // A permanent rejection below must outlive the flush; a stale retry
    // notice must not.
    this.notice = null
    for (const entry of this.outbox.entries()) {
      try {
        const ack = await this.api.submitJudgment(entry)
        this.outbox.remove(entry.item_id)
        this.progress = ack.progress
        if (this.pendingReveal?.item.item_id === entry.item_id) {
          this.lastJudged = this.pendingReveal
          this.pendingReveal = null
        }
      } catch (error) {
        if (error instanceof ServiceError && !error.transient) {
          // The service will never take this one; drop it and say so.
          this.outbox.remove(entry.item_id)
          if (this.pendingReveal?.item.item_id === entry.item_id) {
            this.pendingReveal = null
          }
          this.notice = error.message
          continue
        }
        this.notice = 'Judgment saved locally; retrying.'
        this.scheduleRetry()
        this.emit()
        return false
      }
    }
    return true
  }

  private async advance(): Promise<void> {
    try {
      const next = await this.api.nextItem()
      if (next.kind === 'done') {
        this.phase = 'done'
        this.item = null
      } else {
        this.phase = 'rating'
        this.item = next.item
        this.progress = next.item.progress
      }
    } catch {
      this.phase = 'unreachable'
      this.item = null
      this.notice = 'Rating service unreachable; retrying.'
      this.scheduleRetry()
    }
    this.emit()
  }

  private scheduleRetry(): void {
    if (this.destroyed || this.retryTimer !== null) return
    this.retryTimer = setTimeout(() => {
      this.retryTimer = null
      void this.retryNow()
    }, this.retryMs)
  }

  private clearRetryTimer(): void {
    if (this.retryTimer !== null) {
      clearTimeout(this.retryTimer)
      this.retryTimer = null
    }
  }

  private emit(): void {
    if (!this.destroyed) this.onChange(this.snapshot())
  }
}
