// Shapes of the story bundle consumed from /bundle.json. The bundle is the
// only contract with the backend; nothing here is recomputed server-side.

export interface BundleAsset {
  ppm_base64: string;
  label: string;
}

export interface Bubble {
  id: string;
  x: number;
  y: number;
  color?: string;
  class?: string;
}

export interface TripletBubbles {
  anchor: Bubble;
  positive: Bubble;
  negative: Bubble;
}

export interface ConceptPayload {
  narrative: string;
  figure_asset_ids: string[];
}

export interface GridCell {
  asset_id: string;
  row: number;
  col: number;
}

export interface EmbeddingPayload {
  sample_asset_ids: string[];
  before_grid: GridCell[];
  after_bubbles: Bubble[];
  architecture_text: string;
}

export interface DistanceLine {
  from: string;
  to: string;
  role: "anchor-positive" | "anchor-negative";
}

export interface DistancePayload {
  bubbles: TripletBubbles;
  lines: DistanceLine[];
  formula_text: string;
}

export interface LossPayload {
  bubbles: TripletBubbles;
  margin_default: number;
  margin_range: [number, number];
  loss_kind: "triplet";
  initial_loss: number;
}

export interface TrainingFrame {
  epoch: number;
  bubbles: Bubble[];
  loss: number;
}

export interface TrainingPayload {
  frames: TrainingFrame[];
  loss_curve: number[];
}

export interface NeighborEntry {
  id: string;
  distance: number;
}

export interface InferencePayload {
  query_asset_id: string;
  query_coords: [number, number];
  radius: number;
  k: number;
  neighbors: NeighborEntry[];
}

export interface QuizQuestion {
  prompt: string;
  choices: string[];
  answer_index: number;
}

export interface StorySlice {
  id: string;
  payload: unknown;
}

export interface StoryBundle {
  format_version: number;
  scroll_mode: string;
  dataset_fingerprint: string;
  palette: string[];
  assets: Record<string, BundleAsset>;
  slices: StorySlice[];
  quiz?: QuizQuestion[];
}

export const SLICE_IDS = [
  "snn_concept",
  "embedding_model",
  "euclidean_distance",
  "loss_function",
  "training",
  "inferencing",
] as const;

export interface ParityCase {
  anchor: [number, number];
  positive: [number, number];
  negative: [number, number];
  margin: number;
  loss: number;
}

export interface ParityFixture {
  format_version: number;
  cases: ParityCase[];
}
