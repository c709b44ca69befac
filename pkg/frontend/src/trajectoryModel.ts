// Stored-run browser: list runs, open a trajectory, step through events with
// actor/kind filters. Malformed stored lines surface as error badges while
// the rest of the trajectory still renders.

import { ApiClient } from "./api.js";
import type {
	EventJson,
	PlayerId,
	RunSummary,
	TrajectoryDoc,
	TrajectoryEntry,
	TrialRecordJson,
} from "./types.js";

export interface EventFilter {
	actor?: PlayerId;
	kind?: "message" | "tool_call";
}

export class TrajectoryBrowser {
	runs: RunSummary[] = [];
	entries: TrajectoryEntry[] = [];
	doc: TrajectoryDoc | null = null;
	results: TrialRecordJson[] = [];
	cursor = 0;
	filter: EventFilter = {};

	constructor(private readonly api: ApiClient) {}

	async loadRuns(): Promise<RunSummary[]> {
		this.runs = await this.api.listRuns();
		return this.runs;
	}

	async openRun(runId: string): Promise<TrajectoryEntry[]> {
		this.entries = await this.api.listTrajectories(runId);
		try {
			this.results = await this.api.getResults(runId);
		} catch {
			this.results = []; // run not evaluated yet
		}
		return this.entries;
	}

	async openTrajectory(runId: string, file: string): Promise<TrajectoryDoc> {
		this.doc = await this.api.getTrajectory(runId, file);
		this.cursor = 0;
		return this.doc;
	}

	/** Stored per-criterion breakdown for the trajectory currently open. */
	get currentRecord(): TrialRecordJson | null {
		const header = this.doc?.header;
		if (!header) return null;
		return (
			this.results.find(
				(r) => r.task_id === header.task_id && r.trial_index === header.trial_index,
			) ?? null
		);
	}

	get events(): EventJson[] {
		return this.doc?.events ?? [];
	}

	get filteredEvents(): EventJson[] {
		return this.events.filter((event) => {
			if (this.filter.actor && event.actor !== this.filter.actor) return false;
			if (this.filter.kind && event.action.kind !== this.filter.kind) return false;
			return true;
		});
	}

	get errorBadgeCount(): number {
		return this.doc?.malformed.length ?? 0;
	}

	get current(): EventJson | null {
		const events = this.filteredEvents;
		if (events.length === 0) return null;
		return events[Math.min(this.cursor, events.length - 1)];
	}

	step(delta: number): EventJson | null {
		const events = this.filteredEvents;
		if (events.length === 0) return null;
		this.cursor = Math.max(0, Math.min(events.length - 1, this.cursor + delta));
		return events[this.cursor];
	}

	setFilter(filter: EventFilter): void {
		this.filter = filter;
		this.cursor = 0;
	}

	/** Human-readable form of an event's payload for display. */
	describe(event: EventJson): string {
		if (event.action.kind === "message") {
			return `${event.actor}: ${event.action.text}`;
		}
		const args = JSON.stringify(event.action.args);
		let out = `${event.actor} calls ${event.action.name}(${args === "{}" ? "" : args})`;
		if (event.observation && event.observation.kind === "tool_result") {
			const payload = event.observation.payload;
			const rendered =
				typeof payload === "string" ? payload : JSON.stringify(payload, null, 2);
			out += event.observation.is_error ? `\n  ! ${rendered}` : `\n  -> ${rendered}`;
		}
		return out;
	}
}
