/** Tiny DOM builders; panels construct their controls with these. */

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) {
    if (k === "class") node.className = v;
    else if (k === "text") node.textContent = v;
    else node.setAttribute(k, v);
  }
  node.append(...children);
  return node;
}

export interface SliderSpec {
  label: string;
  min: number;
  max: number;
  step: number;
  value: number;
  unit: string;
}

export interface Slider {
  row: HTMLElement;
  input: HTMLInputElement;
  readout: HTMLElement;
  get(): number;
  set(v: number): void;
}

export function slider(spec: SliderSpec, onInput: () => void): Slider {
  const input = el("input", {
    type: "range",
    min: String(spec.min),
    max: String(spec.max),
    step: String(spec.step),
    value: String(spec.value),
  });
  const readout = el("span", { class: "readout" });
  const row = el(
    "label",
    { class: "slider-row" },
    el("span", { class: "slider-label", text: spec.label }),
    input,
    readout,
  );
  const show = () => {
    readout.textContent = `${input.value} ${spec.unit}`;
  };
  input.addEventListener("input", () => {
    show();
    onInput();
  });
  show();
  return {
    row,
    input,
    readout,
    get: () => Number(input.value),
    set: (v: number) => {
      input.value = String(v);
      show();
    },
  };
}

export function button(label: string, onClick: () => void, cls = ""): HTMLButtonElement {
  const b = el("button", { type: "button", class: cls, text: label });
  b.addEventListener("click", onClick);
  return b;
}

export function fmt(v: number, digits = 2): string {
  return Number.isFinite(v) ? v.toFixed(digits) : "—";
}
