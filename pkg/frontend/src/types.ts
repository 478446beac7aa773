/** Wire types for the rating service, mirrored field for field.
 *
 * The next-item payload is deliberately blind: it carries no dataset,
 * editor, or match index, so nothing here can leak them to raters.
 */

export interface FewShot {
  query: string
  expected: string
  answer: string
  verdict: boolean
}

export interface Progress {
  done: number
  total: number
}

export interface RatingItemView {
  item_id: string
  prompt: string
  generated_text: string
  expected_answers: string[]
  few_shots: FewShot[]
  progress: Progress
}

export type NextItem = { kind: 'item'; item: RatingItemView } | { kind: 'done' }

export interface JudgmentAck {
  status: 'recorded' | 'duplicate'
  progress: Progress
}

export interface PendingJudgment {
  item_id: string
  correct: boolean
}
