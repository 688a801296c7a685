import type {
  Decision,
  DiagnosisRow,
  HistoryRecord,
  PartInfo,
  Phase,
  Question,
  SubpartInfo,
  SymptomInfo,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

interface ErrorEnvelope {
  error?: { code?: string; message?: string };
}

/** Thin typed client over the JSON endpoints. One method per endpoint;
 * no response reshaping beyond JSON parsing, so payloads (distance strings
 * included) flow through untouched. */
export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private async request<T>(method: "GET" | "POST", path: string, body?: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const doc = (await response.json()) as T & ErrorEnvelope;
    if (!response.ok) {
      const err = doc.error ?? {};
      throw new ApiError(response.status, err.code ?? "error", err.message ?? response.statusText);
    }
    return doc;
  }

  parts(): Promise<{ parts: PartInfo[] }> {
    return this.request("GET", "/body/parts");
  }

  subparts(part: string): Promise<{ subparts: SubpartInfo[] }> {
    return this.request("GET", `/body/${encodeURIComponent(part)}/subparts`);
  }

  symptoms(subpartId: string): Promise<{ symptoms: SymptomInfo[] }> {
    return this.request("GET", `/subparts/${encodeURIComponent(subpartId)}/symptoms`);
  }

  startSession(patientId: string): Promise<{ token: string; phase: Phase }> {
    return this.request("POST", "/sessions", { patient_id: patientId });
  }

  submitSymptoms(
    token: string,
    severities: Record<string, number>,
    subpart?: string,
  ): Promise<{ phase: Phase; question_available: boolean }> {
    const body: Record<string, unknown> = { severities };
    if (subpart !== undefined) body.subpart = subpart;
    return this.request("POST", `/sessions/${token}/symptoms`, body);
  }

  question(token: string): Promise<{ done: boolean; question: Question | null }> {
    return this.request("GET", `/sessions/${token}/question`);
  }

  answer(
    token: string,
    questionId: string,
    severity: number,
  ): Promise<{ phase: Phase; question_available: boolean }> {
    return this.request("POST", `/sessions/${token}/answers`, {
      question_id: questionId,
      severity,
    });
  }

  diagnosis(token: string): Promise<{ phase: Phase; results: DiagnosisRow[] }> {
    return this.request("GET", `/sessions/${token}/diagnosis`);
  }

  finalize(token: string): Promise<{ persisted: boolean; decision: Decision }> {
    return this.request("POST", `/sessions/${token}/finalize`);
  }

  history(patientId: string, asOf?: string): Promise<{ as_of: number; records: HistoryRecord[] }> {
    const query = asOf === undefined ? "" : `?as_of=${encodeURIComponent(asOf)}`;
    return this.request("GET", `/patients/${encodeURIComponent(patientId)}/history${query}`);
  }
}
