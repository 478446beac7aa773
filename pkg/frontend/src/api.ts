/** Thin client over the rating service's three endpoints. */

import type { JudgmentAck, NextItem, PendingJudgment, RatingItemView } from './types'

export class ServiceError extends Error {
  constructor(
    message: string,
    readonly status: number | null = null,
  ) {
    super(message)
    this.name = 'ServiceError'
  }

  /** 4xx rejections are permanent; network failures and 5xx are worth retrying. */
  get transient(): boolean {
    return this.status === null || this.status >= 500
  }
}

/** What the session controller needs from the service. */
export interface RatingClient {
  nextItem(): Promise<NextItem>
  submitJudgment(judgment: PendingJudgment): Promise<JudgmentAck>
}

export class RatingApi implements RatingClient {
  constructor(
    readonly baseUrl: string,
    readonly sessionId: string,
    readonly raterId: string,
  ) {}

  private url(tail: string): string {
    const base = this.baseUrl.replace(/\/+$/, '')
    return `${base}/rate/session/${encodeURIComponent(this.sessionId)}/${tail}`
  }

  exportUrl(): string {
    return this.url('export')
  }

  async nextItem(): Promise<NextItem> {
    const response = await this.request(
      this.url(`next?rater_id=${encodeURIComponent(this.raterId)}`),
    )
    if (response.status === 204) return { kind: 'done' }
    const item = (await response.json()) as RatingItemView
    return { kind: 'item', item }
  }

  async submitJudgment(judgment: PendingJudgment): Promise<JudgmentAck> {
    const response = await this.request(this.url('judgment'), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ ...judgment, rater_id: this.raterId }),
    })
    return (await response.json()) as JudgmentAck
  }

  async exportJudgments(): Promise<string> {
    const response = await this.request(this.exportUrl())
    return await response.text()
  }

  private async request(url: string, init?: RequestInit): Promise<Response> {
    let response: Response
    try {
      response = await fetch(url, init)
    } catch (error) {
      throw new ServiceError(`rating service unreachable: ${String(error)}`)
    }
    if (!response.ok) {
      let detail = ''
      try {
        detail = ((await response.json()) as { message?: string }).message ?? ''
      } catch {
        // non-JSON error body; the status code will have to do
      }
      throw new ServiceError(detail || `request failed (${response.status})`, response.status)
    }
    return response
  }
}
