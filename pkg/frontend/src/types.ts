// Wire schema of the review API (mirrors the server's JSON payloads).

export type PlayerId = "agent" | "user";

export interface ToolCallAction {
	kind: "tool_call";
	name: string;
	args: Record<string, unknown>;
}

export interface MessageAction {
	kind: "message";
	text: string;
}

export type Action = ToolCallAction | MessageAction;

export interface ToolResultObservation {
	kind: "tool_result";
	payload: unknown;
	is_error: boolean;
}

export interface IncomingMessageObservation {
	kind: "incoming_message";
	from: PlayerId;
	text: string;
}

export type Observation = ToolResultObservation | IncomingMessageObservation | null;

export interface EventJson {
	index: number;
	actor: PlayerId;
	action: Action;
	observation: Observation;
}

export interface ToolParamSpec {
	name: string;
	type: string;
	required: boolean;
	description: string;
}

export interface ToolSpecJson {
	name: string;
	kind: "read" | "write";
	doc: string;
	params: ToolParamSpec[];
}

export interface CriterionStatus {
	id: string;
	kind: string;
	passed: boolean;
	detail: string;
}

export interface SessionView {
	role: PlayerId;
	instructions: string;
	tools: ToolSpecJson[];
	visible_history: EventJson[];
}

export interface SessionState {
	session_id: string;
	task_id: string;
	mode: string;
	human_role: PlayerId;
	parent_session_id: string | null;
	done: boolean;
	error: string | null;
	stop_reason: string | null;
	awaiting: PlayerId | null;
	your_turn: boolean;
	event_count: number;
	criteria: CriterionStatus[];
	reward: number | null;
	view: SessionView;
}

export interface SessionSummary {
	session_id: string;
	task_id: string;
	human_role: PlayerId;
	done: boolean;
	parent_session_id: string | null;
}

export interface TaskSummary {
	index: number;
	id: string;
	intent: string;
	persona: string;
	n_subtasks: number;
	n_actions: number;
	requires_transfer: boolean;
}

export interface RunSummary {
	run_id: string;
	mode: string;
	domain: string;
	policy_ids: Record<string, string>;
	n_trajectories: number;
}

export interface TrajectoryEntry {
	file: string;
	task_id: string;
	trial_index: number;
}

export interface MalformedLine {
	line: number;
	error: string;
	raw: string;
}

export interface TrajectoryDoc {
	header: { task_id: string; trial_index: number } | null;
	events: EventJson[];
	footer: { stop_reason: string; final_world_hashes: Record<string, string> } | null;
	malformed: MalformedLine[];
}

export interface SseFrame {
	event: string;
	data: string;
}

export interface TrialRecordJson {
	task_id: string;
	trial_index: number;
	reward: number;
	criteria: CriterionStatus[];
	stop_reason: string;
	step_count: number;
	mode: string;
}
