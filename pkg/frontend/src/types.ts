// Wire types mirroring the engine API. The UI never computes scores or
// filters itself; every displayed value comes straight from these fields.

export type ExerciseType =
  | 'fill_in_blank'
  | 'rewrite'
  | 'multiple_choice'
  | 'free_response';

export interface ExerciseEvent {
  kind: 'issued' | 'attempted' | 'completed';
  exercise_id: string;
  exercise_type: ExerciseType;
  prompt: string;
  feedback?: string;
}

export interface ImprovementArea {
  area: string;
  confidence: number;
  examples: string[];
  detected_at?: number;
}

export interface RecommendedResource {
  area: string;
  resource_type: string;
  title: string;
  description: string;
  url: string;
  difficulty_level: 'beginner' | 'intermediate' | 'advanced';
}

export interface ProficiencyEvent {
  combined_level: number;
  llm_level: number | null;
  degraded: boolean;
  assessed_at: number;
}

export interface TurnResult {
  assistant_reply: string;
  exercise_event: ExerciseEvent | null;
  analysis_event: ImprovementArea[] | null;
  proficiency_event: ProficiencyEvent | null;
  recommended: RecommendedResource[] | null;
}

export interface ChatMessage {
  role: 'learner' | 'assistant';
  text: string;
  created_at: number;
}

export interface SessionRecord {
  session_id: string;
  learner_id: string;
  started_at: number;
  ended_at: number | null;
  summary: string | null;
  messages: ChatMessage[];
}

export interface DashboardData {
  level_series: [number, number][];
  area_history: [number, string, number][];
  session_count: number;
  exercise_counts: { issued: number; attempted: number; completed: number };
}
