import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, parseSseFrame } from "../src/api.js";
import { SessionViewModel } from "../src/sessionModel.js";
import { TrajectoryBrowser } from "../src/trajectoryModel.js";
import type { EventJson, SessionState } from "../src/types.js";

function jsonResponse(body: unknown, status = 200): Response {
	return new Response(JSON.stringify(body), {
		status,
		headers: { "Content-Type": "application/json" },
	});
}

function fakeFetch(routes: Record<string, (init?: RequestInit) => unknown>): typeof fetch {
	return (async (input: RequestInfo | URL, init?: RequestInit) => {
		const url = String(input);
		const path = url.replace(/^https?:\/\/[^/]+/, "");
		const key = `${init?.method ?? "GET"} ${path}`;
		const handler = routes[key];
		if (!handler) return jsonResponse({ detail: `no route ${key}` }, 404);
		return jsonResponse(handler(init));
	}) as typeof fetch;
}

const baseState = (overrides: Partial<SessionState> = {}): SessionState => ({
	session_id: "s1",
	task_id: "[service_issue]airplane_mode_on",
	mode: "default",
	human_role: "user",
	parent_session_id: null,
	done: false,
	error: null,
	stop_reason: null,
	awaiting: "user",
	your_turn: true,
	event_count: 1,
	criteria: [
		{ id: "assert_service_status(expected_status='connected')", kind: "env_assertion", passed: false, detail: "" },
	],
	reward: null,
	view: {
		role: "user",
		instructions: "scenario",
		tools: [
			{ name: "toggle_airplane_mode", kind: "write", doc: "", params: [] },
			{
				name: "unlock_sim_with_pin",
				kind: "write",
				doc: "",
				params: [{ name: "pin", type: "string", required: true, description: "" }],
			},
		],
		visible_history: [
			{
				index: 0,
				actor: "agent",
				action: { kind: "message", text: "Hi! How can I help you today?" },
				observation: { kind: "incoming_message", from: "agent", text: "Hi! How can I help you today?" },
			},
		],
	},
	...overrides,
});

describe("SessionViewModel", () => {
	it("starts a session and exposes turn state", async () => {
		const api = new ApiClient(
			"http://x",
			fakeFetch({
				"POST /sessions": () => ({ session_id: "s1" }),
				"GET /sessions/s1": () => baseState(),
			}),
		);
		const vm = new SessionViewModel(api);
		await vm.start({ taskId: "[service_issue]airplane_mode_on", humanRole: "user" });
		expect(vm.turn).toBe("you");
		expect(vm.lastOpponentMessage()).toContain("How can I help");
		expect(vm.allCriteriaPassed).toBe(false);
	});

	it("validates tool arguments client-side", async () => {
		const api = new ApiClient("http://x", fakeFetch({ "GET /sessions/s1": () => baseState() }));
		const vm = new SessionViewModel(api, "s1");
		await vm.refresh();
		expect(vm.validateToolArgs("toggle_airplane_mode", {})).toEqual([]);
		expect(vm.validateToolArgs("toggle_airplane_mode", { force: 1 })[0]).toContain("unexpected");
		expect(vm.validateToolArgs("unlock_sim_with_pin", {})[0]).toContain("missing required");
		expect(vm.validateToolArgs("unlock_sim_with_pin", { pin: 7 })[0]).toContain("must be a string");
		expect(vm.validateToolArgs("warp_drive", {})[0]).toContain("unknown tool");
		await expect(vm.invokeTool("unlock_sim_with_pin", {})).rejects.toThrow(/invalid tool call/);
	});

	it("refuses to act out of turn locally", async () => {
		const api = new ApiClient(
			"http://x",
			fakeFetch({ "GET /sessions/s1": () => baseState({ your_turn: false, awaiting: "agent" }) }),
		);
		const vm = new SessionViewModel(api, "s1");
		await vm.refresh();
		expect(vm.turn).toBe("opponent");
		await expect(vm.sendMessage("hello")).rejects.toThrow(/not your turn/);
	});

	it("surfaces server rejections as ApiError", async () => {
		const api = new ApiClient(
			"http://x",
			fakeFetch({
				"GET /sessions/s1": () => baseState(),
				// no POST action route: 404 with detail
			}),
		);
		const vm = new SessionViewModel(api, "s1");
		await vm.refresh();
		await expect(vm.sendMessage("hello")).rejects.toThrow(ApiError);
	});
});

describe("TrajectoryBrowser", () => {
	const events: EventJson[] = [
		{ index: 0, actor: "agent", action: { kind: "message", text: "hi" }, observation: null },
		{
			index: 1,
			actor: "user",
			action: { kind: "tool_call", name: "toggle_airplane_mode", args: {} },
			observation: { kind: "tool_result", payload: "Airplane Mode is now OFF.", is_error: false },
		},
		{ index: 2, actor: "user", action: { kind: "message", text: "done" }, observation: null },
	];
	const doc = {
		header: { task_id: "t", trial_index: 0 },
		events,
		footer: { stop_reason: "user_stop", final_world_hashes: {} },
		malformed: [{ line: 9, error: "bad json", raw: "{oops" }],
	};

	function browser(): Promise<TrajectoryBrowser> {
		const api = new ApiClient(
			"http://x",
			fakeFetch({
				"GET /runs": () => [
					{ run_id: "r1", mode: "default", domain: "telecom", policy_ids: {}, n_trajectories: 1 },
				],
				"GET /runs/r1/trajectories": () => [{ file: "f.jsonl", task_id: "t", trial_index: 0 }],
				"GET /runs/r1/trajectories/f.jsonl": () => doc,
				"GET /runs/r1/results": () => [
					{
						task_id: "t",
						trial_index: 0,
						reward: 1,
						criteria: [
							{ id: "assert_service_status(expected_status='connected')", kind: "env_assertion", passed: true, detail: "" },
						],
						stop_reason: "user_stop",
						step_count: 3,
						mode: "default",
					},
				],
			}),
		);
		const b = new TrajectoryBrowser(api);
		return b.loadRuns().then(() => b.openRun("r1")).then(() => b.openTrajectory("r1", "f.jsonl")).then(() => b);
	}

	it("loads, filters and steps through events", async () => {
		const b = await browser();
		expect(b.events).toHaveLength(3);
		expect(b.errorBadgeCount).toBe(1);
		b.setFilter({ actor: "agent" });
		expect(b.filteredEvents).toHaveLength(1);
		b.setFilter({ kind: "tool_call" });
		expect(b.filteredEvents.map((e) => e.index)).toEqual([1]);
		b.setFilter({});
		expect(b.step(1)?.index).toBe(1);
		expect(b.step(10)?.index).toBe(2);
		expect(b.step(-10)?.index).toBe(0);
	});

	it("describes events in a readable form", async () => {
		const b = await browser();
		expect(b.describe(events[0])).toBe("agent: hi");
		const tool = b.describe(events[1]);
		expect(tool).toContain("user calls toggle_airplane_mode(");
		expect(tool).toContain("-> Airplane Mode is now OFF.");
	});

	it("pairs the open trajectory with its stored criterion breakdown", async () => {
		const b = await browser();
		expect(b.currentRecord?.reward).toBe(1);
		expect(b.currentRecord?.criteria[0].kind).toBe("env_assertion");
		expect(b.currentRecord?.criteria[0].passed).toBe(true);
	});
});

describe("parseSseFrame", () => {
	it("parses event & data lines", () => {
		expect(parseSseFrame("event: history\ndata: {\"a\":1}")).toEqual({
			event: "history",
			data: '{"a":1}',
		});
		expect(parseSseFrame("data: x\ndata: y")).toEqual({ event: "message", data: "x\ny" });
		expect(parseSseFrame("")).toBeNull();
	});
});
