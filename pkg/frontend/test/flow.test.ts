import assert from "node:assert/strict";
import { test } from "node:test";

import * as flow from "../src/flow.js";
import { createStore, replay } from "../src/state.js";
import type { DiagnosisRow, Phase, Question } from "../src/types.js";

const ROWS3: DiagnosisRow[] = [
  { rank: 1, disease_id: "common_cold", icd: "J00", name: "Common cold", distance: "0.1886" },
  { rank: 2, disease_id: "dust_exposure", icd: "Z77.1", name: "Dust exposure", distance: "0.3894" },
  { rank: 3, disease_id: "nasal_foreign_object", icd: "T17.1", name: "Foreign object in nose", distance: "0.5399" },
];

/** Canned server: one question round, then done. Counts calls and can fail
 * a named operation once. */
class FakeClient {
  submitted: Record<string, number> | null = null;
  answers: Array<{ id: string; severity: number }> = [];
  finalized = 0;
  failOnce: string | null = null;
  private phase: Phase = "collecting";
  private questionPending = true;

  private trip(op: string): void {
    if (this.failOnce === op) {
      this.failOnce = null;
      throw new Error(`boom in ${op}`);
    }
  }

  async parts() {
    this.trip("parts");
    return { parts: [{ name: "head", subparts: ["nose"] }] };
  }

  async subparts(_part: string) {
    this.trip("subparts");
    return { subparts: [{ id: "nose", symptom_count: 4, disease_count: 3 }] };
  }

  async symptoms(_subpartId: string) {
    return {
      symptoms: [
        { id: "sneezing", icd: "R06.7", name: "Sneezing" },
        { id: "runny_nose", icd: "R09.82", name: "Runny nose" },
      ],
    };
  }

  async startSession(_patientId: string) {
    return { token: "tok-1", phase: this.phase };
  }

  async submitSymptoms(_token: string, severities: Record<string, number>) {
    this.trip("submit");
    this.submitted = { ...severities };
    this.phase = "questioning";
    return { phase: this.phase, question_available: true };
  }

  async question(_token: string): Promise<{ done: boolean; question: Question | null }> {
    if (this.phase === "questioning" && this.questionPending) {
      return {
        done: false,
        question: { id: "q_strange_smell", symptom_id: "strange_smell", prompt: "How severe?" },
      };
    }
    return { done: true, question: null };
  }

  async answer(_token: string, questionId: string, severity: number) {
    this.answers.push({ id: questionId, severity });
    this.questionPending = false;
    this.phase = "final";
    return { phase: this.phase, question_available: false };
  }

  async diagnosis(_token: string) {
    return { phase: this.phase, results: ROWS3 };
  }

  async finalize(_token: string) {
    this.finalized += 1;
    return {
      persisted: true,
      decision: { patient_id: "px", disease_id: "common_cold", icd: "J00", distance: "0.1886" },
    };
  }
}

test("scripted flow drives the endpoint sequence to a finalized result", async () => {
  const client = new FakeClient();
  const store = createStore();
  const deps: flow.FlowDeps = { client, store };

  await flow.runScriptedTriage(deps, {
    patientId: "px",
    part: "head",
    subpart: "nose",
    severities: { sneezing: 0.7, runny_nose: 0.6 },
    answers: [0.1],
  });

  const state = store.getState();
  assert.equal(state.step, "result");
  assert.equal(state.finalized, true);
  assert.deepEqual(state.results, ROWS3);
  assert.deepEqual(client.submitted, { sneezing: 0.7, runny_nose: 0.6 });
  assert.deepEqual(client.answers, [{ id: "q_strange_smell", severity: 0.1 }]);
  assert.equal(client.finalized, 1);
});

test("final state is a pure function of the recorded event log", async () => {
  const client = new FakeClient();
  const store = createStore();
  await flow.runScriptedTriage(
    { client, store },
    { patientId: "px", part: "head", subpart: "nose", severities: { sneezing: 0.7 }, answers: [0] },
  );
  assert.deepEqual(replay(store.getLog()), store.getState());
});

test("network failure arms a retry that keeps entered severities", async () => {
  const client = new FakeClient();
  client.failOnce = "submit";
  const store = createStore();
  const deps: flow.FlowDeps = { client, store };

  await flow.boot(deps, "px");
  await flow.pickPart(deps, "head");
  await flow.pickSubpart(deps, "nose");
  flow.setSeverity(deps, "sneezing", 0.7);
  await flow.submitSymptoms(deps);

  let state = store.getState();
  assert.match(state.error ?? "", /boom in submit/);
  assert.deepEqual(state.pending, { name: "submit" });
  assert.deepEqual(state.severities, { sneezing: 0.7 });
  assert.equal(state.step, "rate_symptoms"); // nothing lost, nothing advanced

  await flow.retry(deps);
  state = store.getState();
  assert.equal(state.error, null);
  assert.deepEqual(client.submitted, { sneezing: 0.7 });
  assert.equal(state.step, "answering");
});

test("retry after a failed parts load", async () => {
  const client = new FakeClient();
  client.failOnce = "parts";
  const store = createStore();
  const deps: flow.FlowDeps = { client, store };
  await flow.boot(deps, "px");
  assert.deepEqual(store.getState().pending, { name: "load_parts" });
  await flow.retry(deps);
  assert.equal(store.getState().parts.length, 1);
  assert.equal(store.getState().error, null);
});
