/** Wires the controller, view, and keyboard shortcuts into a root element. */

import { RatingApi } from './api'
import { bindJudgmentKeys } from './keyboard'
import { JudgmentOutbox } from './outbox'
import { SessionController } from './session'
import { SessionView } from './view'

export interface AppConfig {
  serviceUrl: string
  sessionId: string
  raterId: string
  storage?: Storage
  retryMs?: number
}

export class RaterApp {
  private readonly controller: SessionController
  private readonly unbindKeys: () => void

  constructor(root: HTMLElement, config: AppConfig) {
    const api = new RatingApi(config.serviceUrl, config.sessionId, config.raterId)
    const storage = config.storage ?? window.localStorage
    const outbox = new JudgmentOutbox(storage, config.sessionId, config.raterId)
    const view = new SessionView(
      root,
      {
        onCorrect: () => this.controller.judge(true),
        onIncorrect: () => this.controller.judge(false),
        onRetry: () => void this.controller.retryNow(),
      },
      api.exportUrl(),
      config.raterId,
    )
    this.controller = new SessionController(api, outbox, (snapshot) => view.render(snapshot), {
      retryMs: config.retryMs,
    })
    this.unbindKeys = bindJudgmentKeys({
      onCorrect: () => this.controller.judge(true),
      onIncorrect: () => this.controller.judge(false),
    })
  }

  start(): Promise<void> {
    return this.controller.start()
  }

  destroy(): void {
    this.unbindKeys()
    this.controller.destroy()
  }
}
