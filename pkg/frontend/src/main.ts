import { ApiClient } from "./api.js";
import * as flow from "./flow.js";
import { HISTORY_COLUMNS, historyRows, initialHistory, refreshHistory } from "./history.js";
import { createStore } from "./state.js";
import { render } from "./ui.js";

const params = new URLSearchParams(window.location.search);
const apiBase = params.get("api") ?? "http://127.0.0.1:8000";
const patientId = params.get("patient") ?? "anonymous";

const client = new ApiClient(apiBase);
const store = createStore();
const deps: flow.FlowDeps = { client, store };
const root = document.getElementById("app") as HTMLElement;
const historyRoot = document.getElementById("history") as HTMLElement;

const actions = {
  pickPart: (part: string) => void flow.pickPart(deps, part),
  pickSubpart: (subpart: string) => void flow.pickSubpart(deps, subpart),
  setSeverity: (symptomId: string, value: number) => flow.setSeverity(deps, symptomId, value),
  submitSymptoms: () => void flow.submitSymptoms(deps),
  answer: (severity: number) => void flow.answerQuestion(deps, severity),
  finalize: () => void flow.finalize(deps),
  retry: () => void flow.retry(deps),
  showHistory: () => void showHistory(null),
};

store.subscribe((state) => render(root, state, actions));

let history = initialHistory(patientId);

async function showHistory(asOf: string | null): Promise<void> {
  history = await refreshHistory(client, history, asOf);
  historyRoot.replaceChildren();
  const heading = document.createElement("h2");
  heading.textContent = `History for ${history.patientId}`;
  historyRoot.append(heading);

  const control = document.createElement("input");
  control.type = "datetime-local";
  control.addEventListener("change", () => {
    if (control.value) {
      void showHistory(new Date(control.value).toISOString().replace(/\.\d{3}Z$/, "Z"));
    } else {
      void showHistory(null);
    }
  });
  historyRoot.append(control);

  if (history.error !== null) {
    const note = document.createElement("p");
    note.className = "muted";
    note.textContent = history.error;
    historyRoot.append(note);
    return;
  }
  const rows = historyRows(history);
  if (rows.length === 0) {
    const empty = document.createElement("p");
    empty.className = "muted";
    empty.textContent = "no recorded visits at this time";
    historyRoot.append(empty);
    return;
  }
  const table = document.createElement("table");
  const head = document.createElement("tr");
  for (const column of HISTORY_COLUMNS) {
    const th = document.createElement("th");
    th.textContent = column;
    head.append(th);
  }
  table.append(head);
  for (const row of rows) {
    const tr = document.createElement("tr");
    for (const cell of row) {
      const td = document.createElement("td");
      td.textContent = cell;
      tr.append(td);
    }
    table.append(tr);
  }
  historyRoot.append(table);
}

void flow.boot(deps, patientId);
