// Patient history view: an as-of control over the bitemporal snapshot.
// The table model is a pure function of the fetched records, so identical
// as-of values render identical tables.

import type { ApiClient } from "./api.js";
import type { HistoryRecord } from "./types.js";

export interface HistoryState {
  patientId: string;
  asOf: string | null; // ISO instant; null = server-side "now"
  records: HistoryRecord[];
  error: string | null;
}

export function initialHistory(patientId: string): HistoryState {
  return { patientId, asOf: null, records: [], error: null };
}

export async function refreshHistory(
  client: Pick<ApiClient, "history">,
  state: HistoryState,
  asOf: string | null,
): Promise<HistoryState> {
  try {
    const { records } = await client.history(state.patientId, asOf ?? undefined);
    return { ...state, asOf, records, error: null };
  } catch (err) {
    return { ...state, asOf, error: err instanceof Error ? err.message : String(err) };
  }
}

export const HISTORY_COLUMNS = ["disease", "icd", "distance"] as const;

export function historyRows(state: HistoryState): string[][] {
  return state.records.map((r) => [r.disease, r.icd, String(r.distance)]);
}
