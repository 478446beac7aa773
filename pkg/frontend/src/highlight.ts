/** Mark expected-answer occurrences in generated text.
 *
 * Matching mirrors the scorer: case-sensitive substring search, so
 * "Lithium" stays unmarked when the alias is "lithium".  The result is
 * built from text nodes, never innerHTML, so model output cannot
 * inject markup.
 */

export interface MatchSpan {
  start: number
  end: number
}

export function findAliasSpans(text: string, aliases: string[]): MatchSpan[] {
  const candidates: MatchSpan[] = []
  for (const alias of aliases) {
    if (alias.length === 0) continue
    let from = 0
    while (true) {
      const at = text.indexOf(alias, from)
      if (at === -1) break
      candidates.push({ start: at, end: at + alias.length })
      from = at + 1
    }
  }
  // Earliest span wins; on a tied start the longest does. Overlaps collapse.
  candidates.sort((a, b) => a.start - b.start || b.end - a.end)
  const spans: MatchSpan[] = []
  for (const span of candidates) {
    const last = spans[spans.length - 1]
    if (last !== undefined && span.start < last.end) continue
    spans.push(span)
  }
  return spans
}

export function highlightAliases(text: string, aliases: string[]): DocumentFragment {
  const fragment = document.createDocumentFragment()
  let cursor = 0
  for (const span of findAliasSpans(text, aliases)) {
    if (span.start > cursor) {
      fragment.append(document.createTextNode(text.slice(cursor, span.start)))
    }
    const mark = document.createElement('mark')
    mark.textContent = text.slice(span.start, span.end)
    fragment.append(mark)
    cursor = span.end
  }
  if (cursor < text.length) {
    fragment.append(document.createTextNode(text.slice(cursor)))
  }
  return fragment
}
