// Orchestration: each user action drives exactly the endpoint sequence the
// server expects and feeds the responses back as events. Failures dispatch
// request_failed with a serializable op descriptor so retry never loses
// what the user already entered.

import type { ApiClient } from "./api.js";
import type { PendingOp, Store, UiEvent } from "./state.js";

export interface FlowDeps {
  client: Pick<
    ApiClient,
    | "parts"
    | "subparts"
    | "symptoms"
    | "startSession"
    | "submitSymptoms"
    | "question"
    | "answer"
    | "diagnosis"
    | "finalize"
  >;
  store: Store;
}

function dispatch(deps: FlowDeps, event: UiEvent): void {
  deps.store.dispatch(event);
}

async function guarded(deps: FlowDeps, op: PendingOp, work: () => Promise<void>): Promise<void> {
  try {
    await work();
  } catch (err) {
    dispatch(deps, {
      kind: "request_failed",
      op,
      message: err instanceof Error ? err.message : String(err),
    });
  }
}

export async function boot(deps: FlowDeps, patientId: string): Promise<void> {
  dispatch(deps, { kind: "boot", patientId });
  await loadParts(deps);
}

export async function loadParts(deps: FlowDeps): Promise<void> {
  await guarded(deps, { name: "load_parts" }, async () => {
    const { parts } = await deps.client.parts();
    dispatch(deps, { kind: "parts_loaded", parts });
  });
}

export async function pickPart(deps: FlowDeps, part: string): Promise<void> {
  dispatch(deps, { kind: "part_picked", part });
  await guarded(deps, { name: "pick_part", part }, async () => {
    const { subparts } = await deps.client.subparts(part);
    dispatch(deps, { kind: "subparts_loaded", subparts });
  });
}

export async function pickSubpart(deps: FlowDeps, subpart: string): Promise<void> {
  dispatch(deps, { kind: "subpart_picked", subpart });
  await guarded(deps, { name: "pick_subpart", subpart }, async () => {
    const state = deps.store.getState();
    if (state.token === null) {
      const { token } = await deps.client.startSession(state.patientId);
      dispatch(deps, { kind: "session_started", token });
    }
    const { symptoms } = await deps.client.symptoms(subpart);
    dispatch(deps, { kind: "symptoms_loaded", symptoms });
  });
}

export function setSeverity(deps: FlowDeps, symptomId: string, value: number): void {
  dispatch(deps, { kind: "severity_set", symptomId, value });
}

/** Fetch the live top-3 and the outstanding question; flips the step to
 * result when the server has nothing left to ask. */
export async function refresh(deps: FlowDeps): Promise<void> {
  await guarded(deps, { name: "refresh" }, async () => {
    const token = requireToken(deps);
    const diagnosis = await deps.client.diagnosis(token);
    dispatch(deps, {
      kind: "diagnosis_received",
      phase: diagnosis.phase,
      results: diagnosis.results,
    });
    const question = await deps.client.question(token);
    dispatch(deps, {
      kind: "question_received",
      done: question.done,
      question: question.question,
    });
  });
}

export async function submitSymptoms(deps: FlowDeps): Promise<void> {
  await guarded(deps, { name: "submit" }, async () => {
    const state = deps.store.getState();
    const token = requireToken(deps);
    const result = await deps.client.submitSymptoms(
      token,
      state.severities,
      state.subpart ?? undefined,
    );
    dispatch(deps, {
      kind: "symptoms_submitted",
      phase: result.phase,
      questionAvailable: result.question_available,
    });
  });
  if (deps.store.getState().error === null) {
    await refresh(deps);
  }
}

export async function answerQuestion(deps: FlowDeps, severity: number): Promise<void> {
  const question = deps.store.getState().question;
  if (question === null) return;
  await guarded(deps, { name: "answer", questionId: question.id, severity }, async () => {
    const token = requireToken(deps);
    const result = await deps.client.answer(token, question.id, severity);
    dispatch(deps, {
      kind: "answer_recorded",
      phase: result.phase,
      questionAvailable: result.question_available,
    });
  });
  if (deps.store.getState().error === null) {
    await refresh(deps);
  }
}

export async function finalize(deps: FlowDeps): Promise<void> {
  await guarded(deps, { name: "finalize" }, async () => {
    const token = requireToken(deps);
    const { decision } = await deps.client.finalize(token);
    dispatch(deps, { kind: "finalized", decision });
  });
}

export async function retry(deps: FlowDeps): Promise<void> {
  const pending = deps.store.getState().pending;
  if (pending === null) return;
  dispatch(deps, { kind: "retry_started" });
  switch (pending.name) {
    case "load_parts":
      return loadParts(deps);
    case "pick_part":
      return pickPart(deps, pending.part);
    case "pick_subpart":
      return pickSubpart(deps, pending.subpart);
    case "submit":
      return submitSymptoms(deps);
    case "answer":
      return answerQuestion(deps, pending.severity);
    case "refresh":
      return refresh(deps);
    case "finalize":
      return finalize(deps);
  }
}

function requireToken(deps: FlowDeps): string {
  const token = deps.store.getState().token;
  if (token === null) throw new Error("no session yet");
  return token;
}

export interface TriageScript {
  patientId: string;
  part: string;
  subpart: string;
  severities: Record<string, number>;
  /** severities to answer outstanding questions with, in order */
  answers?: number[];
}

/** Drive a whole session from a script; used by the contract tests and by
 * demos. Ends at the result step with the decision finalized. */
export async function runScriptedTriage(deps: FlowDeps, script: TriageScript): Promise<void> {
  await boot(deps, script.patientId);
  await pickPart(deps, script.part);
  await pickSubpart(deps, script.subpart);
  for (const [symptomId, value] of Object.entries(script.severities)) {
    setSeverity(deps, symptomId, value);
  }
  await submitSymptoms(deps);
  const answers = [...(script.answers ?? [])];
  let guard = 0;
  while (deps.store.getState().step === "answering") {
    if (guard++ > 50) throw new Error("question loop did not terminate");
    await answerQuestion(deps, answers.shift() ?? 0);
  }
  if (deps.store.getState().step !== "result") {
    throw new Error(`expected result step, got ${deps.store.getState().step}`);
  }
  await finalize(deps);
}
