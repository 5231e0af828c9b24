/** Small DOM construction helpers shared by all panels. */

export interface ElAttrs {
  className?: string;
  text?: string;
  title?: string;
  value?: string;
  placeholder?: string;
  type?: string;
  disabled?: boolean;
  dataset?: Record<string, string>;
  onClick?: (ev: MouseEvent) => void;
}

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: ElAttrs = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (attrs.className) node.className = attrs.className;
  if (attrs.text !== undefined) node.textContent = attrs.text;
  if (attrs.title !== undefined) node.title = attrs.title;
  if (attrs.placeholder !== undefined && 'placeholder' in node) {
    (node as unknown as HTMLInputElement).placeholder = attrs.placeholder;
  }
  if (attrs.type !== undefined && 'type' in node) {
    (node as unknown as HTMLInputElement).type = attrs.type;
  }
  if (attrs.value !== undefined && 'value' in node) {
    (node as unknown as HTMLInputElement).value = attrs.value;
  }
  if (attrs.disabled !== undefined && 'disabled' in node) {
    (node as unknown as HTMLButtonElement).disabled = attrs.disabled;
  }
  if (attrs.dataset) {
    for (const [key, value] of Object.entries(attrs.dataset)) {
      node.dataset[key] = value;
    }
  }
  if (attrs.onClick) node.addEventListener('click', attrs.onClick as EventListener);
  for (const child of children) {
    node.append(child);
  }
  return node;
}

const SVG_NS = 'http://www.w3.org/2000/svg';

export function svgEl(tag: string, attrs: Record<string, string> = {}): SVGElement {
  const node = document.createElementNS(SVG_NS, tag) as SVGElement;
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  return node;
}

export function clear(node: Element): void {
  while (node.firstChild) {
    node.removeChild(node.firstChild);
  }
}
