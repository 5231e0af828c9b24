/** Shared test utilities: DOM mounting, event firing, async settling. */

export function mount(): HTMLElement {
  document.body.innerHTML = '';
  const root = document.createElement('div');
  document.body.append(root);
  return root;
}

export function click(target: Element | null): void {
  if (!target) throw new Error('click target not found');
  target.dispatchEvent(new Event('click', { bubbles: true }));
}

export function typeInto(input: Element | null, value: string): void {
  if (!input) throw new Error('input not found');
  (input as HTMLInputElement).value = value;
  input.dispatchEvent(new Event('input', { bubbles: true }));
}

/** Wait until a condition holds; store actions settle within a few ticks. */
export async function until(cond: () => boolean, timeoutMs = 2000): Promise<void> {
  const start = Date.now();
  while (!cond()) {
    if (Date.now() - start > timeoutMs) {
      throw new Error('timed out waiting for condition');
    }
    await new Promise((resolve) => setTimeout(resolve, 5));
  }
}

export function texts(root: Element, selector: string): string[] {
  return [...root.querySelectorAll(selector)].map((n) => n.textContent ?? '');
}
