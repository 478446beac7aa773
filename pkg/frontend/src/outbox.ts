/** Judgments held locally until the service acknowledges them.
 *
 * Every submission passes through here: enqueue persists to storage
 * before the POST goes out, remove runs only on acknowledgement.  A
 * reload at any point in between leaves the entry queued, and the
 * service's first-write-wins rule makes the replay harmless.
 */

import type { PendingJudgment } from './types'

export class JudgmentOutbox {
  private readonly key: string

  constructor(
    private readonly storage: Storage,
    sessionId: string,
    raterId: string,
  ) {
    this.key = `rater-ui/outbox/${sessionId}/${raterId}`
  }

  entries(): PendingJudgment[] {
    const raw = this.storage.getItem(this.key)
    if (raw === null) return []
    try {
      const parsed = JSON.parse(raw) as unknown
      return Array.isArray(parsed) ? (parsed as PendingJudgment[]) : []
    } catch {
      return []
    }
  }

  get size(): number {
    return this.entries().length
  }

  has(itemId: string): boolean {
    return this.entries().some((entry) => entry.item_id === itemId)
  }

  /** Queue a judgment; a second verdict for a queued item is dropped, like the service. */
  enqueue(judgment: PendingJudgment): void {
    const entries = this.entries()
    if (entries.some((entry) => entry.item_id === judgment.item_id)) return
    entries.push(judgment)
    this.write(entries)
  }

  remove(itemId: string): void {
    this.write(this.entries().filter((entry) => entry.item_id !== itemId))
  }

  private write(entries: PendingJudgment[]): void {
    if (entries.length === 0) {
      this.storage.removeItem(this.key)
    } else {
      this.storage.setItem(this.key, JSON.stringify(entries))
    }
  }
}
