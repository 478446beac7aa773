/** DOM rendering for the rating workflow.
 *
 * Blind by construction: the item card shows exactly what the service
 * payload carries - prompt, generated answer, expected answers,
 * few-shot guidance, progress - and nothing else.  Alias highlighting
 * appears only in the previous-item strip, after the judgment is in,
 * so the machine's match cannot anchor the rater.
 */

import { highlightAliases } from './highlight'
import type { SessionSnapshot } from './session'
import type { FewShot, RatingItemView } from './types'

export interface ViewHandlers {
  onCorrect: () => void
  onIncorrect: () => void
  onRetry: () => void
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag)
  if (className !== undefined) node.className = className
  if (text !== undefined) node.textContent = text
  return node
}

function labeled(label: string, body: HTMLElement): HTMLElement {
  const section = el('section', 'block')
  section.append(el('h2', 'block-label', label), body)
  return section
}

export class SessionView {
  constructor(
    private readonly root: HTMLElement,
    private readonly handlers: ViewHandlers,
    private readonly exportUrl: string,
    private readonly raterId: string,
  ) {}

  render(snapshot: SessionSnapshot): void {
    const parts: HTMLElement[] = [this.header(snapshot)]
    if (snapshot.notice !== null) parts.push(this.noticeBanner(snapshot))
    switch (snapshot.phase) {
      case 'connecting':
        parts.push(el('p', 'status', 'Connecting to the rating service...'))
        break
      case 'unreachable':
        break
      case 'done':
        parts.push(this.completion())
        break
      case 'rating':
        if (snapshot.item !== null) parts.push(this.itemCard(snapshot.item, snapshot.busy))
        break
    }
    if (snapshot.lastJudged !== null) parts.push(this.revealStrip(snapshot.lastJudged))
    this.root.replaceChildren(...parts)
  }

  private header(snapshot: SessionSnapshot): HTMLElement {
    const header = el('header', 'top')
    header.append(el('span', 'rater', `Rater: ${this.raterId}`))
    if (snapshot.progress !== null) {
      header.append(
        el('span', 'progress', `${snapshot.progress.done} / ${snapshot.progress.total} judged`),
      )
    }
    return header
  }

  private noticeBanner(snapshot: SessionSnapshot): HTMLElement {
    const banner = el('div', 'banner')
    banner.append(el('span', undefined, snapshot.notice ?? ''))
    const retry = el('button', 'retry', 'Retry now')
    retry.addEventListener('click', () => this.handlers.onRetry())
    banner.append(retry)
    return banner
  }

  private itemCard(item: RatingItemView, busy: boolean): HTMLElement {
    const card = el('article', 'card')

    const prompt = el('p', 'prompt-text', item.prompt)
    card.append(labeled('Prompt', prompt))

    // Plain text on purpose: no highlighting before the judgment is in.
    const answer = el('p', 'answer-text', item.generated_text)
    card.append(labeled('Model answer', answer))

    const expected = el('ul', 'expected-list')
    for (const alias of item.expected_answers) {
      expected.append(el('li', undefined, alias))
    }
    card.append(labeled('Expected answers', expected))

    card.append(this.fewShotPanel(item.few_shots))

    const controls = el('div', 'controls')
    const yes = el('button', 'correct', 'Correct (y)')
    const no = el('button', 'incorrect', 'Incorrect (n)')
    yes.disabled = busy
    no.disabled = busy
    yes.addEventListener('click', () => this.handlers.onCorrect())
    no.addEventListener('click', () => this.handlers.onIncorrect())
    controls.append(yes, no)
    card.append(controls)

    return card
  }

  private fewShotPanel(fewShots: FewShot[]): HTMLElement {
    const panel = el('details', 'guide')
    panel.append(el('summary', undefined, 'Rating guide'))
    panel.append(
      el(
        'p',
        'guide-intro',
        'Judge whether the first answer the model gives is correct for the prompt. Worked examples:',
      ),
    )
    for (const shot of fewShots) {
      const row = el('div', 'guide-shot')
      row.append(labeled('Query', el('p', undefined, shot.query)))
      row.append(labeled('Expected', el('p', undefined, shot.expected)))
      row.append(labeled('Answer', el('p', undefined, shot.answer)))
      row.append(labeled('Verdict', el('p', undefined, shot.verdict ? 'Yes' : 'No')))
      panel.append(row)
    }
    return panel
  }

  private revealStrip(reveal: { item: RatingItemView; correct: boolean }): HTMLElement {
    const strip = el('aside', 'reveal')
    strip.append(
      el(
        'h2',
        'block-label',
        `Previous item recorded as ${reveal.correct ? 'correct' : 'incorrect'}`,
      ),
    )
    strip.append(
      el(
        'p',
        'reveal-note',
        "The machine's exact-match hits are highlighted below for reference; your judgment is already recorded.",
      ),
    )
    const answer = el('p', 'answer-text')
    answer.append(highlightAliases(reveal.item.generated_text, reveal.item.expected_answers))
    strip.append(answer)
    return strip
  }

  private completion(): HTMLElement {
    const card = el('article', 'card completion')
    card.append(el('h2', undefined, 'Session complete'))
    card.append(el('p', undefined, 'Every item in this session has your judgment. Thank you.'))
    const hint = el('p', 'export-hint', 'Judgments can be exported from ')
    const link = el('a', undefined, this.exportUrl)
    link.setAttribute('href', this.exportUrl)
    hint.append(link)
    card.append(hint)
    return card
  }
}
