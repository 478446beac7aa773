import { beforeEach, describe, expect, it, vi } from 'vitest'

import type { SessionSnapshot } from '../src/session'
import type { RatingItemView } from '../src/types'
import { SessionView, type ViewHandlers } from '../src/view'

const ITEM: RatingItemView = {
  item_id: 'i1',
  prompt: 'The tallest mountain on Mars is',
  generated_text: 'Olympus Mons, by a wide margin. olympus mons again.',
  expected_answers: ['Olympus Mons'],
  few_shots: [
    { query: 'q1', expected: 'e1', answer: 'a1', verdict: false },
    { query: 'q2', expected: 'e2', answer: 'a2', verdict: true },
  ],
  progress: { done: 3, total: 10 },
}

function snapshot(overrides: Partial<SessionSnapshot> = {}): SessionSnapshot {
  return {
    phase: 'rating',
    item: ITEM,
    busy: false,
    held: 0,
    progress: ITEM.progress,
    lastJudged: null,
    notice: null,
    ...overrides,
  }
}

describe('SessionView', () => {
  let root: HTMLElement
  let handlers: ViewHandlers
  let view: SessionView

  beforeEach(() => {
    root = document.createElement('div')
    document.body.replaceChildren(root)
    handlers = { onCorrect: vi.fn(), onIncorrect: vi.fn(), onRetry: vi.fn() }
    view = new SessionView(root, handlers, 'http://service/rate/session/s1/export', 'alice')
  })

  it('shows the item as the payload carries it, with no highlighting', () => {
    view.render(snapshot())
    const text = root.textContent ?? ''
    expect(text).toContain('The tallest mountain on Mars is')
    expect(text).toContain('Olympus Mons, by a wide margin.')
    expect(text).toContain('Expected answers')
    expect(text).toContain('3 / 10 judged')
    expect(text).toContain('Rater: alice')
    expect(root.querySelectorAll('mark').length).toBe(0)
  })

  it('keeps the rating guide collapsed until opened', () => {
    view.render(snapshot())
    const guide = root.querySelector<HTMLDetailsElement>('details.guide')
    expect(guide).not.toBeNull()
    expect(guide!.open).toBe(false)
    expect(guide!.querySelectorAll('.guide-shot').length).toBe(2)
    expect(guide!.textContent).toContain('q2')
    expect(guide!.textContent).toContain('Yes')
  })

  it('routes the buttons to the judgment handlers', () => {
    view.render(snapshot())
    root.querySelector<HTMLButtonElement>('button.correct')!.click()
    root.querySelector<HTMLButtonElement>('button.incorrect')!.click()
    expect(handlers.onCorrect).toHaveBeenCalledTimes(1)
    expect(handlers.onIncorrect).toHaveBeenCalledTimes(1)
  })

  it('disables judgment while one is unacknowledged', () => {
    view.render(snapshot({ busy: true }))
    expect(root.querySelector<HTMLButtonElement>('button.correct')!.disabled).toBe(true)
    expect(root.querySelector<HTMLButtonElement>('button.incorrect')!.disabled).toBe(true)
  })

  it('highlights the machine match only in the previous-item strip', () => {
    view.render(
      snapshot({
        lastJudged: { item: ITEM, correct: true },
        item: { ...ITEM, item_id: 'i2', generated_text: 'Olympus Mons once more' },
      }),
    )
    const reveal = root.querySelector('aside.reveal')
    expect(reveal).not.toBeNull()
    expect(reveal!.textContent).toContain('recorded as correct')
    expect(reveal!.textContent).toContain("machine's exact-match hits")
    // Case-sensitive: the lowercase restatement stays unmarked.
    const marks = reveal!.querySelectorAll('mark')
    expect(marks.length).toBe(1)
    expect(marks[0].textContent).toBe('Olympus Mons')
    // The item under judgment stays plain.
    expect(root.querySelector('article.card')!.querySelectorAll('mark').length).toBe(0)
  })

  it('shows the retry banner and wires its button', () => {
    view.render(snapshot({ notice: 'Judgment saved locally; retrying.', held: 1, busy: true }))
    expect(root.textContent).toContain('Judgment saved locally; retrying.')
    root.querySelector<HTMLButtonElement>('button.retry')!.click()
    expect(handlers.onRetry).toHaveBeenCalledTimes(1)
  })

  it('ends on a completion card that points at the export', () => {
    view.render(snapshot({ phase: 'done', item: null, progress: { done: 10, total: 10 } }))
    expect(root.textContent).toContain('Session complete')
    const link = root.querySelector<HTMLAnchorElement>('.export-hint a')
    expect(link!.getAttribute('href')).toBe('http://service/rate/session/s1/export')
  })
})
