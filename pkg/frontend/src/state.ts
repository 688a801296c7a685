// UI state machine. `reduce` is pure and every event is plain JSON, so a
// recorded event log replayed over the initial state reproduces the final
// state exactly; the renderer is a function of the state alone.

import type {
  Decision,
  DiagnosisRow,
  PartInfo,
  Phase,
  Question,
  SubpartInfo,
  SymptomInfo,
} from "./types.js";

export type Step = "pick_part" | "pick_subpart" | "rate_symptoms" | "answering" | "result";

// verbal anchors; the slider itself moves in 0.05 steps
export const SEVERITY_ANCHORS: ReadonlyArray<[string, number]> = [
  ["none", 0.0],
  ["mild", 0.33],
  ["moderate", 0.66],
  ["severe", 1.0],
];
export const SEVERITY_STEP = 0.05;

export type PendingOp =
  | { name: "load_parts" }
  | { name: "pick_part"; part: string }
  | { name: "pick_subpart"; subpart: string }
  | { name: "submit" }
  | { name: "answer"; questionId: string; severity: number }
  | { name: "refresh" }
  | { name: "finalize" };

export type UiEvent =
  | { kind: "boot"; patientId: string }
  | { kind: "parts_loaded"; parts: PartInfo[] }
  | { kind: "part_picked"; part: string }
  | { kind: "subparts_loaded"; subparts: SubpartInfo[] }
  | { kind: "subpart_picked"; subpart: string }
  | { kind: "session_started"; token: string }
  | { kind: "symptoms_loaded"; symptoms: SymptomInfo[] }
  | { kind: "severity_set"; symptomId: string; value: number }
  | { kind: "symptoms_submitted"; phase: Phase; questionAvailable: boolean }
  | { kind: "diagnosis_received"; phase: Phase; results: DiagnosisRow[] }
  | { kind: "question_received"; done: boolean; question: Question | null }
  | { kind: "answer_recorded"; phase: Phase; questionAvailable: boolean }
  | { kind: "finalized"; decision: Decision }
  | { kind: "request_failed"; op: PendingOp; message: string }
  | { kind: "retry_started" };

export interface UiState {
  step: Step;
  patientId: string;
  token: string | null;
  phase: Phase | null;
  parts: PartInfo[];
  part: string | null;
  subparts: SubpartInfo[];
  subpart: string | null;
  symptoms: SymptomInfo[];
  severities: Record<string, number>;
  question: Question | null;
  results: DiagnosisRow[];
  decision: Decision | null;
  finalized: boolean;
  error: string | null;
  pending: PendingOp | null;
}

export function initialState(): UiState {
  return {
    step: "pick_part",
    patientId: "anonymous",
    token: null,
    phase: null,
    parts: [],
    part: null,
    subparts: [],
    subpart: null,
    symptoms: [],
    severities: {},
    question: null,
    results: [],
    decision: null,
    finalized: false,
    error: null,
    pending: null,
  };
}

export function clampSeverity(value: number): number {
  if (Number.isNaN(value)) return 0;
  return Math.min(1, Math.max(0, value));
}

export function reduce(state: UiState, event: UiEvent): UiState {
  switch (event.kind) {
    case "boot":
      return { ...initialState(), patientId: event.patientId };
    case "parts_loaded":
      return { ...state, parts: event.parts, error: null, pending: null };
    case "part_picked":
      return { ...state, part: event.part };
    case "subparts_loaded":
      return { ...state, subparts: event.subparts, step: "pick_subpart", error: null, pending: null };
    case "subpart_picked":
      return { ...state, subpart: event.subpart };
    case "session_started":
      return { ...state, token: event.token, phase: "collecting" };
    case "symptoms_loaded":
      return { ...state, symptoms: event.symptoms, step: "rate_symptoms", error: null, pending: null };
    case "severity_set":
      return {
        ...state,
        severities: { ...state.severities, [event.symptomId]: clampSeverity(event.value) },
      };
    case "symptoms_submitted":
      return { ...state, phase: event.phase, error: null, pending: null };
    case "diagnosis_received":
      // the server refuses this while collecting, so results imply phase moved on
      return { ...state, phase: event.phase, results: event.results, error: null };
    case "question_received":
      if (event.done || event.question === null) {
        return { ...state, question: null, step: "result" };
      }
      return { ...state, question: event.question, step: "answering" };
    case "answer_recorded":
      return { ...state, phase: event.phase, question: null, error: null, pending: null };
    case "finalized":
      return { ...state, finalized: true, decision: event.decision, error: null, pending: null };
    case "request_failed":
      // entered severities and session state survive; the op is retryable
      return { ...state, error: event.message, pending: event.op };
    case "retry_started":
      return { ...state, error: null };
  }
}

export function replay(log: UiEvent[]): UiState {
  return log.reduce(reduce, initialState());
}

export interface Store {
  getState(): UiState;
  getLog(): UiEvent[];
  dispatch(event: UiEvent): void;
  subscribe(listener: (state: UiState) => void): void;
}

export function createStore(): Store {
  let state = initialState();
  const log: UiEvent[] = [];
  const listeners: Array<(s: UiState) => void> = [];
  return {
    getState: () => state,
    getLog: () => [...log],
    dispatch(event: UiEvent) {
      log.push(event);
      state = reduce(state, event);
      for (const fn of listeners) fn(state);
    },
    subscribe(listener: (s: UiState) => void) {
      listeners.push(listener);
    },
  };
}
