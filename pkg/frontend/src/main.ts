/** Entry point: connect from query parameters, or show the connect form. */

import { RaterApp } from './app'

const LAST_CONNECT_KEY = 'rater-ui/last-connect'

interface ConnectDefaults {
  service: string
  session: string
  rater: string
}

function defaults(): ConnectDefaults {
  const fallback = {
    service: `${window.location.protocol}//${window.location.hostname}:8100`,
    session: '',
    rater: '',
  }
  try {
    const raw = window.localStorage.getItem(LAST_CONNECT_KEY)
    return raw === null ? fallback : { ...fallback, ...(JSON.parse(raw) as ConnectDefaults) }
  } catch {
    return fallback
  }
}

function renderConnectForm(root: HTMLElement): void {
  const prefill = defaults()
  const form = document.createElement('form')
  form.className = 'card connect'

  const fields: Array<[keyof ConnectDefaults, string]> = [
    ['service', 'Service URL'],
    ['session', 'Session id'],
    ['rater', 'Rater id'],
  ]
  const inputs = new Map<string, HTMLInputElement>()
  for (const [name, label] of fields) {
    const row = document.createElement('label')
    row.textContent = label
    const input = document.createElement('input')
    input.name = name
    input.value = prefill[name]
    input.required = true
    row.append(input)
    form.append(row)
    inputs.set(name, input)
  }
  const go = document.createElement('button')
  go.type = 'submit'
  go.textContent = 'Start rating'
  form.append(go)

  form.addEventListener('submit', (event) => {
    event.preventDefault()
    const chosen = {
      service: inputs.get('service')!.value.trim(),
      session: inputs.get('session')!.value.trim(),
      rater: inputs.get('rater')!.value.trim(),
    }
    window.localStorage.setItem(LAST_CONNECT_KEY, JSON.stringify(chosen))
    const params = new URLSearchParams(chosen)
    // Reload with the session in the URL so refresh resumes in place.
    window.location.search = params.toString()
  })

  root.replaceChildren(form)
}

function boot(): void {
  const root = document.getElementById('app')
  if (root === null) return
  const params = new URLSearchParams(window.location.search)
  const service = params.get('service')
  const session = params.get('session')
  const rater = params.get('rater')
  if (service !== null && session !== null && rater !== null) {
    const app = new RaterApp(root, { serviceUrl: service, sessionId: session, raterId: rater })
    void app.start()
  } else {
    renderConnectForm(root)
  }
}

boot()
