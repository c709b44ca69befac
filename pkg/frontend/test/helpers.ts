// Spawns the real backend for integration tests: generates a small task
// suite, starts the serve API on a random port, and waits for readiness.

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export const APPENDIX_TASK_ID = "[service_issue]airplane_mode_on|unseat_sim_card";

export interface ServerHandle {
	baseUrl: string;
	root: string;
	tasksPath: string;
	storeDir: string;
	proc: ChildProcess;
	stop(): void;
}

export async function startServer(): Promise<ServerHandle> {
	const root = mkdtempSync(join(tmpdir(), "duet-ui-"));
	const tasksPath = join(root, "tasks.json");
	const storeDir = join(root, "store");
	execFileSync("python3", [
		"-m", "duet.cli", "generate",
		"--intent", "service_issue",
		"--max-subtasks", "2",
		"--out", tasksPath,
	]);
	const port = 21000 + Math.floor(Math.random() * 9000);
	const proc = spawn(
		"python3",
		["-m", "duet.cli", "serve", "--store", storeDir, "--tasks", tasksPath, "--port", String(port)],
		{ stdio: ["ignore", "pipe", "pipe"] },
	);
	const baseUrl = `http://127.0.0.1:${port}`;
	const deadline = Date.now() + 30_000;
	while (Date.now() < deadline) {
		try {
			const resp = await fetch(`${baseUrl}/health`);
			if (resp.ok) {
				return {
					baseUrl,
					root,
					tasksPath,
					storeDir,
					proc,
					stop: () => {
						proc.kill("SIGTERM");
					},
				};
			}
		} catch {
			// not up yet
		}
		await new Promise((resolve) => setTimeout(resolve, 250));
	}
	proc.kill("SIGTERM");
	throw new Error("backend did not become healthy in time");
}

/** Re-evaluate a checkpointed session trajectory with the headless evaluator. */
export function reEvaluateHeadlessly(
	storeDir: string,
	sessionId: string,
	tasksPath: string,
): { reward: number; stop_reason: string; replay_ok: boolean } {
	const script = `
import json, sys
from duet.store import trajectory_from_lines, replay_trajectory
from duet.tasks import read_suite
from duet.telecom import build_environment
from duet.evaluation import compute_reward
from duet.world import GlobalState

path, tasks_path, task_id = sys.argv[1], sys.argv[2], sys.argv[3]
lines = open(path).read().splitlines()
trajectory = trajectory_from_lines(lines)
_, tasks = read_suite(tasks_path)
task = next(t for t in tasks if t.id == task_id)
env = build_environment()
replay = replay_trajectory(trajectory, task, env)
state = GlobalState(env.world, trajectory.events)
record = compute_reward(task, trajectory, state, env)
print(json.dumps({"reward": record.reward, "stop_reason": trajectory.stop_reason, "replay_ok": replay.ok}))
`;
	const out = execFileSync("python3", [
		"-c", script,
		join(storeDir, "sessions", `${sessionId}.jsonl`),
		tasksPath,
		APPENDIX_TASK_ID,
	]);
	return JSON.parse(out.toString());
}
