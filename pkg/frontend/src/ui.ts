// DOM renderer: a function of the state plus action callbacks. No state of
// its own and no arithmetic on anything the server computed.

import type { UiState } from "./state.js";
import { SEVERITY_ANCHORS, SEVERITY_STEP } from "./state.js";

export interface Actions {
  pickPart(part: string): void;
  pickSubpart(subpart: string): void;
  setSeverity(symptomId: string, value: number): void;
  submitSymptoms(): void;
  answer(severity: number): void;
  finalize(): void;
  retry(): void;
  showHistory(): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: Array<Node | string> = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

function severityControl(
  current: number,
  onChange: (value: number) => void,
): HTMLElement {
  const wrap = el("div", { class: "severity" });
  for (const [label, value] of SEVERITY_ANCHORS) {
    const button = el("button", { type: "button", class: "anchor" }, [label]);
    button.addEventListener("click", () => onChange(value));
    wrap.append(button);
  }
  const slider = el("input", {
    type: "range",
    min: "0",
    max: "1",
    step: String(SEVERITY_STEP),
    value: String(current),
  });
  slider.addEventListener("input", () => onChange(Number(slider.value)));
  const readout = el("span", { class: "readout" }, [current.toFixed(2)]);
  wrap.append(slider, readout);
  return wrap;
}

function topThreePanel(state: UiState): HTMLElement {
  const panel = el("section", { class: "top3" }, [el("h3", {}, ["Current top 3"])]);
  if (state.results.length === 0) {
    panel.append(el("p", { class: "muted" }, ["no scores yet"]));
    return panel;
  }
  const table = el("table");
  table.append(el("tr", {}, [
    el("th", {}, ["#"]), el("th", {}, ["Condition"]),
    el("th", {}, ["ICD-10"]), el("th", {}, ["Distance"]),
  ]));
  for (const row of state.results) {
    table.append(el("tr", {}, [
      el("td", {}, [String(row.rank)]),
      el("td", {}, [row.name]),
      el("td", {}, [row.icd]),
      // verbatim server string; the UI never reformats distances
      el("td", { class: "distance" }, [row.distance]),
    ]));
  }
  panel.append(table);
  return panel;
}

export function render(root: HTMLElement, state: UiState, actions: Actions): void {
  root.replaceChildren();
  root.append(el("h1", {}, ["Triage"]));

  if (state.error !== null) {
    const banner = el("div", { class: "error", role: "alert" }, [
      `Request failed: ${state.error} `,
    ]);
    const button = el("button", { type: "button" }, ["Retry"]);
    button.addEventListener("click", () => actions.retry());
    banner.append(button);
    root.append(banner);
  }

  switch (state.step) {
    case "pick_part": {
      root.append(el("h2", {}, ["Where is the problem?"]));
      const list = el("div", { class: "choices" });
      for (const part of state.parts) {
        const button = el("button", { type: "button" }, [part.name]);
        button.addEventListener("click", () => actions.pickPart(part.name));
        list.append(button);
      }
      root.append(list);
      break;
    }
    case "pick_subpart": {
      root.append(el("h2", {}, [`Narrow it down (${state.part ?? ""})`]));
      const list = el("div", { class: "choices" });
      for (const sub of state.subparts) {
        const button = el("button", { type: "button" }, [
          `${sub.id} (${sub.symptom_count} symptoms)`,
        ]);
        button.addEventListener("click", () => actions.pickSubpart(sub.id));
        list.append(button);
      }
      if (state.subparts.length === 0) {
        list.append(el("p", { class: "muted" }, ["nothing catalogued here yet"]));
      }
      root.append(list);
      break;
    }
    case "rate_symptoms": {
      root.append(el("h2", {}, ["Rate each symptom"]));
      for (const symptom of state.symptoms) {
        const row = el("div", { class: "symptom" }, [
          el("label", {}, [`${symptom.name} (${symptom.icd})`]),
        ]);
        row.append(
          severityControl(state.severities[symptom.id] ?? 0, (value) =>
            actions.setSeverity(symptom.id, value),
          ),
        );
        root.append(row);
      }
      const submit = el("button", { type: "button", class: "primary" }, ["Continue"]);
      submit.addEventListener("click", () => actions.submitSymptoms());
      root.append(submit);
      break;
    }
    case "answering": {
      root.append(topThreePanel(state));
      if (state.question !== null) {
        root.append(el("h2", {}, [state.question.prompt]));
        let chosen = 0;
        const control = severityControl(0, (value) => {
          chosen = value;
        });
        const send = el("button", { type: "button", class: "primary" }, ["Answer"]);
        send.addEventListener("click", () => actions.answer(chosen));
        root.append(control, send);
      }
      break;
    }
    case "result": {
      root.append(el("h2", {}, ["Assessment"]), topThreePanel(state));
      if (state.finalized) {
        root.append(el("p", { class: "muted" }, ["Recorded to the patient history."]));
      } else {
        const button = el("button", { type: "button", class: "primary" }, [
          "Record this decision",
        ]);
        button.addEventListener("click", () => actions.finalize());
        root.append(button);
      }
      const history = el("button", { type: "button" }, ["Patient history"]);
      history.addEventListener("click", () => actions.showHistory());
      root.append(history);
      break;
    }
  }
}
