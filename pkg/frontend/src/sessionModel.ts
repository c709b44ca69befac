// Live-play view model: one human role in a running session. Renders only
// what the server's policy view exposes; the turn rule is enforced here for
// UX and re-enforced by the server.

import { ApiClient } from "./api.js";
import type {
	Action,
	CriterionStatus,
	EventJson,
	SessionState,
	ToolSpecJson,
} from "./types.js";

export type TurnLabel = "you" | "opponent" | "finished";

export class SessionViewModel {
	state: SessionState | null = null;

	constructor(
		private readonly api: ApiClient,
		public sessionId: string | null = null,
	) {}

	async start(options: {
		taskId: string;
		humanRole: "agent" | "user";
		mode?: string;
		opponentPolicy?: string;
	}): Promise<void> {
		const { session_id } = await this.api.startSession(options);
		this.sessionId = session_id;
		await this.refresh();
	}

	async attach(sessionId: string): Promise<void> {
		this.sessionId = sessionId;
		await this.refresh();
	}

	async refresh(): Promise<SessionState> {
		if (this.sessionId === null) throw new Error("no session");
		this.state = await this.api.getSession(this.sessionId);
		return this.state;
	}

	get turn(): TurnLabel {
		if (!this.state || this.state.done) return "finished";
		return this.state.your_turn ? "you" : "opponent";
	}

	get transcript(): EventJson[] {
		return this.state?.view.visible_history ?? [];
	}

	get tools(): ToolSpecJson[] {
		return this.state?.view.tools ?? [];
	}

	get criteria(): CriterionStatus[] {
		return this.state?.criteria ?? [];
	}

	get allCriteriaPassed(): boolean {
		const criteria = this.criteria;
		return criteria.length > 0 && criteria.every((c) => c.passed);
	}

	get reward(): number | null {
		return this.state?.reward ?? null;
	}

	get stopReason(): string | null {
		return this.state?.stop_reason ?? null;
	}

	lastOpponentMessage(): string | null {
		const mine = this.state?.human_role;
		for (let i = this.transcript.length - 1; i >= 0; i--) {
			const event = this.transcript[i];
			if (event.actor !== mine && event.action.kind === "message") {
				return event.action.text;
			}
		}
		return null;
	}

	/** Client-side mirror of the server's structural argument validation. */
	validateToolArgs(name: string, args: Record<string, unknown>): string[] {
		const spec = this.tools.find((t) => t.name === name);
		if (!spec) return [`unknown tool: ${name}`];
		const problems: string[] = [];
		const declared = new Set(spec.params.map((p) => p.name));
		for (const key of Object.keys(args)) {
			if (!declared.has(key)) problems.push(`unexpected argument '${key}'`);
		}
		for (const param of spec.params) {
			const value = args[param.name];
			if (value === undefined) {
				if (param.required) problems.push(`missing required argument '${param.name}'`);
				continue;
			}
			const jsType = typeof value;
			const want =
				param.type === "string"
					? "string"
					: param.type === "boolean"
						? "boolean"
						: "number";
			if (jsType !== want) {
				problems.push(`'${param.name}' must be a ${param.type}`);
			}
		}
		return problems;
	}

	private async act(action: Action): Promise<SessionState> {
		if (this.sessionId === null) throw new Error("no session");
		if (this.turn !== "you") throw new Error("not your turn");
		this.state = await this.api.postAction(this.sessionId, action);
		return this.state;
	}

	sendMessage(text: string): Promise<SessionState> {
		return this.act({ kind: "message", text });
	}

	async invokeTool(name: string, args: Record<string, unknown> = {}): Promise<SessionState> {
		const problems = this.validateToolArgs(name, args);
		if (problems.length > 0) {
			throw new Error(`invalid tool call: ${problems.join("; ")}`);
		}
		return this.act({ kind: "tool_call", name, args });
	}

	/** Fork this session at an earlier event; returns a model on the new branch. */
	async rewind(eventIndex: number, note: string, replacement?: Action): Promise<SessionViewModel> {
		if (this.sessionId === null) throw new Error("no session");
		const { session_id } = await this.api.rewind(this.sessionId, eventIndex, note, replacement);
		const forked = new SessionViewModel(this.api, session_id);
		await forked.refresh();
		return forked;
	}

	async close(): Promise<void> {
		if (this.sessionId !== null) await this.api.closeSession(this.sessionId);
	}
}
