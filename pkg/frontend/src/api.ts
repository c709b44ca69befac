// Typed client over the review API, with an injectable fetch so tests can
// fake or record traffic. SSE is consumed via streaming fetch, which works
// in both browsers and node.

import type {
	Action,
	RunSummary,
	SessionState,
	SessionSummary,
	SseFrame,
	TaskSummary,
	TrajectoryDoc,
	TrajectoryEntry,
	TrialRecordJson,
} from "./types.js";

export type FetchLike = typeof fetch;

export class ApiError extends Error {
	constructor(readonly status: number, message: string) {
		super(`HTTP ${status}: ${message}`);
	}
}

export interface StartSessionOptions {
	taskId: string;
	humanRole: "agent" | "user";
	mode?: string;
	opponentPolicy?: string;
	maxSteps?: number;
}

export class ApiClient {
	constructor(
		readonly baseUrl: string,
		private readonly fetchImpl: FetchLike = fetch,
	) {}

	private async request<T>(path: string, init?: RequestInit): Promise<T> {
		const resp = await this.fetchImpl(`${this.baseUrl}${path}`, init);
		if (!resp.ok) {
			let detail = resp.statusText;
			try {
				const body = (await resp.json()) as { detail?: string };
				if (body.detail) detail = body.detail;
			} catch {
				// non-JSON error body: keep the status text
			}
			throw new ApiError(resp.status, detail);
		}
		return (await resp.json()) as T;
	}

	private post<T>(path: string, body: unknown): Promise<T> {
		return this.request<T>(path, {
			method: "POST",
			headers: { "Content-Type": "application/json" },
			body: JSON.stringify(body),
		});
	}

	health(): Promise<{ status: string; domain: string }> {
		return this.request("/health");
	}

	listTasks(): Promise<TaskSummary[]> {
		return this.request("/tasks");
	}

	getTask(index: number): Promise<{ index: number; doc: unknown; markdown: string }> {
		return this.request(`/tasks/${index}`);
	}

	listRuns(): Promise<RunSummary[]> {
		return this.request("/runs");
	}

	listTrajectories(runId: string): Promise<TrajectoryEntry[]> {
		return this.request(`/runs/${encodeURIComponent(runId)}/trajectories`);
	}

	getTrajectory(runId: string, file: string): Promise<TrajectoryDoc> {
		return this.request(
			`/runs/${encodeURIComponent(runId)}/trajectories/${encodeURIComponent(file)}`,
		);
	}

	getResults(runId: string): Promise<TrialRecordJson[]> {
		return this.request(`/runs/${encodeURIComponent(runId)}/results`);
	}

	listSessions(): Promise<SessionSummary[]> {
		return this.request("/sessions");
	}

	startSession(options: StartSessionOptions): Promise<{ session_id: string }> {
		return this.post("/sessions", {
			task_id: options.taskId,
			human_role: options.humanRole,
			mode: options.mode ?? "default",
			opponent_policy: options.opponentPolicy ?? "oracle",
			max_steps: options.maxSteps ?? 200,
		});
	}

	getSession(sessionId: string): Promise<SessionState> {
		return this.request(`/sessions/${sessionId}`);
	}

	postAction(sessionId: string, action: Action): Promise<SessionState> {
		return this.post(`/sessions/${sessionId}/action`, { action });
	}

	rewind(
		sessionId: string,
		eventIndex: number,
		note: string,
		replacement?: Action,
	): Promise<{ session_id: string; parent_session_id: string }> {
		return this.post(`/sessions/${sessionId}/rewind`, {
			event_index: eventIndex,
			note,
			replacement_action: replacement ?? null,
		});
	}

	closeSession(sessionId: string): Promise<{ closed: boolean }> {
		return this.post(`/sessions/${sessionId}/close`, {});
	}

	/** Stream session frames until the server sends `end` or the signal aborts. */
	async *streamSession(sessionId: string, signal?: AbortSignal): AsyncGenerator<SseFrame> {
		const resp = await this.fetchImpl(`${this.baseUrl}/sessions/${sessionId}/stream`, { signal });
		if (!resp.ok || resp.body === null) {
			throw new ApiError(resp.status, "stream unavailable");
		}
		const reader = resp.body.getReader();
		const decoder = new TextDecoder();
		let buffer = "";
		try {
			while (true) {
				const { done, value } = await reader.read();
				if (done) break;
				buffer += decoder.decode(value, { stream: true });
				let cut: number;
				while ((cut = buffer.indexOf("\n\n")) >= 0) {
					const frame = parseSseFrame(buffer.slice(0, cut));
					buffer = buffer.slice(cut + 2);
					if (frame) {
						yield frame;
						if (frame.event === "end") return;
					}
				}
			}
		} finally {
			reader.releaseLock();
		}
	}
}

export function parseSseFrame(block: string): SseFrame | null {
	let event = "message";
	const data: string[] = [];
	for (const line of block.split("\n")) {
		if (line.startsWith("event: ")) event = line.slice(7).trim();
		else if (line.startsWith("data: ")) data.push(line.slice(6));
	}
	if (data.length === 0 && event === "message") return null;
	return { event, data: data.join("\n") };
}

export interface RecordedExchange {
	url: string;
	status: number;
	body: string;
}

/** Wraps a fetch implementation and records every response body that crosses
 * the wire; used to verify information hiding end to end. */
export class RecordingFetch {
	readonly exchanges: RecordedExchange[] = [];

	constructor(private readonly inner: FetchLike = fetch) {}

	get fetch(): FetchLike {
		return (async (input: RequestInfo | URL, init?: RequestInit) => {
			const resp = await this.inner(input as string, init);
			const copy = resp.clone();
			let body = "";
			try {
				body = await copy.text();
			} catch {
				body = "<unreadable>";
			}
			this.exchanges.push({ url: String(input), status: resp.status, body });
			return resp;
		}) as FetchLike;
	}

	bodies(): string[] {
		return this.exchanges.map((e) => e.body);
	}
}
