// End-to-end play against the real backend: an automation script plays the
// user role through the session view model, completes the appendix repair
// task against the oracle agent, and the recorded trajectory re-evaluates to
// the same result headlessly.

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { SessionViewModel } from "../src/sessionModel.js";
import { APPENDIX_TASK_ID, reEvaluateHeadlessly, startServer, type ServerHandle } from "./helpers.js";

let server: ServerHandle;

beforeAll(async () => {
	server = await startServer();
});

afterAll(() => {
	server?.stop();
});

/** Scripted "human": follow the agent's instructions, report results, stop
 * when every criterion is green. */
async function playUserRole(vm: SessionViewModel): Promise<void> {
	await vm.sendMessage(
		"Hi there! My phone has been showing 'No Service' for hours. I'm John Smith, phone number 555-123-2002.",
	);
	for (let guard = 0; guard < 20 && vm.turn === "you"; guard++) {
		const said = vm.lastOpponentMessage() ?? "";
		const ownedTool = vm.tools.find((tool) => said.includes(tool.name));
		if (ownedTool) {
			const state = await vm.invokeTool(ownedTool.name, {});
			const last = state.view.visible_history[state.view.visible_history.length - 1];
			const payload =
				last.observation?.kind === "tool_result" ? String(last.observation.payload) : "";
			await vm.sendMessage(`I did that. My phone now shows: ${payload}`);
			continue;
		}
		if (vm.allCriteriaPassed) {
			await vm.sendMessage("Everything works now, thank you so much! ###STOP###");
			break;
		}
		await vm.sendMessage("Okay, what should I try next?");
	}
}

describe("live play end to end", () => {
	it("human-as-user completes the appendix task with reward 1", async () => {
		const api = new ApiClient(server.baseUrl);
		const vm = new SessionViewModel(api);
		await vm.start({ taskId: APPENDIX_TASK_ID, humanRole: "user" });

		expect(vm.turn).toBe("you");
		expect(vm.criteria).toHaveLength(1);
		expect(vm.allCriteriaPassed).toBe(false);

		await playUserRole(vm);

		expect(vm.state?.done).toBe(true);
		expect(vm.stopReason).toBe("user_stop");
		expect(vm.reward).toBe(1);
		expect(vm.allCriteriaPassed).toBe(true);

		// the user performed exactly the two expected device actions
		const myTools = vm.transcript
			.filter((e) => e.actor === "user" && e.action.kind === "tool_call")
			.map((e) => (e.action.kind === "tool_call" ? e.action.name : ""));
		expect(myTools).toEqual(["toggle_airplane_mode", "reseat_sim_card"]);

		// recorded session re-evaluates identically without the UI
		const headless = reEvaluateHeadlessly(server.storeDir, vm.sessionId!, server.tasksPath);
		expect(headless.replay_ok).toBe(true);
		expect(headless.reward).toBe(1);
		expect(headless.stop_reason).toBe("user_stop");
	});

	it("streams the finished session over SSE", async () => {
		const api = new ApiClient(server.baseUrl);
		const vm = new SessionViewModel(api);
		await vm.start({ taskId: APPENDIX_TASK_ID, humanRole: "user" });
		await playUserRole(vm);

		const frames = [];
		for await (const frame of api.streamSession(vm.sessionId!)) {
			frames.push(frame);
		}
		const history = frames.filter((f) => f.event === "history");
		const end = frames.find((f) => f.event === "end");
		expect(history.length).toBeGreaterThanOrEqual(8);
		expect(end).toBeDefined();
		expect(JSON.parse(end!.data).reward).toBe(1);
	});

	it("rejects acting out of turn and supports rewind branches", async () => {
		const api = new ApiClient(server.baseUrl);
		const vm = new SessionViewModel(api);
		await vm.start({ taskId: APPENDIX_TASK_ID, humanRole: "user" });
		await playUserRole(vm);
		// session over: server must refuse further actions
		await expect(api.postAction(vm.sessionId!, { kind: "message", text: "late" })).rejects.toThrow(
			/409/,
		);
		const fork = await vm.rewind(2, "replay from the first exchange");
		expect(fork.state?.parent_session_id).toBe(vm.sessionId);
		expect(fork.state?.done).toBe(false);
		// two replayed events plus the opponent's next live move; the opponent
		// continues mid-conversation rather than greeting again
		expect(fork.state?.event_count).toBe(3);
		const greetings = fork.transcript.filter(
			(e) => e.action.kind === "message" && e.action.text === "Hi! How can I help you today?",
		);
		expect(greetings).toHaveLength(1);
		const sessions = await api.listSessions();
		const ids = sessions.map((s) => s.session_id);
		expect(ids).toContain(vm.sessionId!);
		expect(ids).toContain(fork.sessionId!);
		await fork.close();
	});

	it("lists tasks and serves task detail", async () => {
		const api = new ApiClient(server.baseUrl);
		const tasks = await api.listTasks();
		const appendix = tasks.find((t) => t.id === APPENDIX_TASK_ID);
		expect(appendix).toBeDefined();
		const detail = await api.getTask(appendix!.index);
		expect(detail.markdown).toContain("## Ticket");
	});
});
