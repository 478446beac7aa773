/** y/n judgment shortcuts, global while a session is on screen. */

interface JudgmentKeyHandlers {
  onCorrect: () => void
  onIncorrect: () => void
}

export function bindJudgmentKeys(
  handlers: JudgmentKeyHandlers,
  target: Window = window,
): () => void {
  const onKeyDown = (event: KeyboardEvent) => {
    // Leave typing and browser chords alone.
    if (
      event.target instanceof HTMLInputElement ||
      event.target instanceof HTMLTextAreaElement ||
      event.target instanceof HTMLSelectElement
    ) {
      return
    }
    if (event.ctrlKey || event.metaKey || event.altKey) return

    switch (event.key.toLowerCase()) {
      case 'y':
        event.preventDefault()
        handlers.onCorrect()
        break
      case 'n':
        event.preventDefault()
        handlers.onIncorrect()
        break
    }
  }

  target.addEventListener('keydown', onKeyDown)
  return () => target.removeEventListener('keydown', onKeyDown)
}
