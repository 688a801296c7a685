// Payload shapes of the meddx JSON API (schemas ship in ../schemas).

export interface PartInfo {
  name: string;
  subparts: string[];
}

export interface SubpartInfo {
  id: string;
  symptom_count: number;
  disease_count: number;
}

export interface SymptomInfo {
  id: string;
  icd: string;
  name: string;
}

export interface Question {
  id: string;
  symptom_id: string;
  prompt: string;
}

// distance is a 4-decimal string and must be rendered verbatim:
// the UI does no diagnosis math.
export interface DiagnosisRow {
  rank: number;
  disease_id: string;
  icd: string;
  name: string;
  distance: string;
}

export interface Decision {
  patient_id: string;
  disease_id: string;
  icd: string;
  distance: string;
}

export interface HistoryRecord {
  id: string;
  patient: string;
  disease: string;
  icd: string;
  distance: number;
}

export type Phase = "collecting" | "questioning" | "final";
