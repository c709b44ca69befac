// Information hiding across the wire: in an agent-role session, no network
// response may carry the user's tool events or tool-result observations.

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, RecordingFetch } from "../src/api.js";
import { SessionViewModel } from "../src/sessionModel.js";
import type { EventJson } from "../src/types.js";
import { APPENDIX_TASK_ID, startServer, type ServerHandle } from "./helpers.js";

let server: ServerHandle;

beforeAll(async () => {
	server = await startServer();
});

afterAll(() => {
	server?.stop();
});

function collectEvents(value: unknown, sink: EventJson[]): void {
	if (Array.isArray(value)) {
		for (const item of value) collectEvents(item, sink);
		return;
	}
	if (value && typeof value === "object") {
		const record = value as Record<string, unknown>;
		if (
			typeof record.index === "number"
			&& typeof record.actor === "string"
			&& record.action !== undefined
		) {
			sink.push(record as unknown as EventJson);
		}
		for (const nested of Object.values(record)) collectEvents(nested, sink);
	}
}

describe("agent-role session traffic", () => {
	it("never exposes user tool events or their payloads", async () => {
		const recorder = new RecordingFetch(fetch);
		const api = new ApiClient(server.baseUrl, recorder.fetch);
		const vm = new SessionViewModel(api);
		await vm.start({ taskId: APPENDIX_TASK_ID, humanRole: "agent" });

		// greet, then walk the user through both device fixes
		await vm.sendMessage("Hi! How can I help you today?");
		await vm.sendMessage("Please use your toggle_airplane_mode tool now, then tell me what you see.");
		await vm.sendMessage("Thanks. Now please use your reseat_sim_card tool and report back.");
		for (let guard = 0; guard < 6 && !vm.state?.done; guard++) {
			await vm.sendMessage("Great. Is there anything else I can help you with?");
		}
		expect(vm.state?.done).toBe(true);
		expect(vm.reward).toBe(1);

		// the user DID act server-side (the criteria flipped), yet nothing the
		// agent received contains those events
		const events: EventJson[] = [];
		for (const body of recorder.bodies()) {
			try {
				collectEvents(JSON.parse(body), events);
			} catch {
				// non-JSON bodies (none expected) are ignored
			}
		}
		expect(events.length).toBeGreaterThan(0);
		const userToolEvents = events.filter(
			(e) => e.actor === "user" && e.action.kind === "tool_call",
		);
		expect(userToolEvents).toEqual([]);
		const foreignResults = events.filter(
			(e) => e.actor === "user" && e.observation?.kind === "tool_result",
		);
		expect(foreignResults).toEqual([]);

		// the tool palette offered to the human agent is agent-only
		const toolNames = vm.tools.map((t) => t.name);
		expect(toolNames).toContain("get_customer_by_phone");
		expect(toolNames).not.toContain("toggle_airplane_mode");
		expect(toolNames).not.toContain("reseat_sim_card");

		// a finished session's SSE replay is similarly scoped to the agent view
		const sseEvents: EventJson[] = [];
		for await (const frame of api.streamSession(vm.sessionId!)) {
			if (frame.event === "history") collectEvents(JSON.parse(frame.data), sseEvents);
		}
		expect(sseEvents.length).toBeGreaterThan(0);
		expect(sseEvents.filter((e) => e.actor === "user" && e.action.kind === "tool_call")).toEqual([]);
	});
});
