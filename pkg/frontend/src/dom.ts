// Plain-DOM rendering layer. No framework: each panel re-renders from its
// model after every interaction, which is plenty for a review console.

import { ApiClient } from "./api.js";
import { SessionViewModel } from "./sessionModel.js";
import { TrajectoryBrowser } from "./trajectoryModel.js";
import type { EventJson, TaskSummary } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
	tag: K,
	attrs: Record<string, string> = {},
	...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
	const node = document.createElement(tag);
	for (const [key, value] of Object.entries(attrs)) {
		if (key === "class") node.className = value;
		else node.setAttribute(key, value);
	}
	node.append(...children);
	return node;
}

function eventLine(event: EventJson, mine: string): HTMLElement {
	const cls = event.actor === mine ? "event mine" : "event theirs";
	if (event.action.kind === "message") {
		return el("div", { class: cls, "data-testid": "event-message" },
			el("span", { class: "actor" }, event.actor),
			el("span", { class: "text" }, event.action.text),
		);
	}
	const parts: (Node | string)[] = [
		el("span", { class: "actor" }, event.actor),
		el("code", {}, `${event.action.name}(${JSON.stringify(event.action.args)})`),
	];
	if (event.observation?.kind === "tool_result") {
		const payload = event.observation.payload;
		const rendered = typeof payload === "string" ? payload : JSON.stringify(payload, null, 2);
		parts.push(el("pre", { class: event.observation.is_error ? "result error" : "result" }, rendered));
	}
	return el("div", { class: cls + " tool", "data-testid": "event-tool" }, ...parts);
}

export class PlayConsole {
	readonly model: SessionViewModel;
	private tasks: TaskSummary[] = [];

	constructor(
		private readonly api: ApiClient,
		private readonly root: HTMLElement,
	) {
		this.model = new SessionViewModel(api);
	}

	async init(): Promise<void> {
		this.tasks = await this.api.listTasks();
		this.renderLobby();
	}

	private renderLobby(): void {
		const taskSelect = el("select", { "data-testid": "task-select" });
		for (const task of this.tasks) {
			taskSelect.append(el("option", { value: task.id }, `${task.id} (${task.n_actions} actions)`));
		}
		const roleSelect = el("select", { "data-testid": "role-select" },
			el("option", { value: "user" }, "play the user"),
			el("option", { value: "agent" }, "play the agent"),
		);
		const startButton = el("button", { "data-testid": "start-session" }, "Start session");
		startButton.addEventListener("click", async () => {
			await this.model.start({
				taskId: taskSelect.value,
				humanRole: roleSelect.value as "agent" | "user",
			});
			this.renderSession();
		});
		this.root.replaceChildren(
			el("div", { class: "lobby" },
				el("h2", {}, "Live play"),
				taskSelect, roleSelect, startButton,
			),
		);
	}

	renderSession(): void {
		const state = this.model.state;
		if (!state) return;
		const mine = state.human_role;

		const transcript = el("div", { class: "transcript", "data-testid": "transcript" });
		for (const event of this.model.transcript) transcript.append(eventLine(event, mine));

		const criteria = el("ul", { class: "criteria", "data-testid": "criteria" });
		for (const criterion of this.model.criteria) {
			criteria.append(
				el("li", { class: criterion.passed ? "pass" : "fail" },
					`${criterion.passed ? "PASS" : "PENDING"} ${criterion.id}`),
			);
		}

		const turn = el("div", {
			class: "turn",
			"data-testid": "turn-indicator",
			"data-turn": this.model.turn,
		}, this.model.turn === "you" ? "Your turn" : this.model.turn === "opponent" ? "Waiting for opponent" : `Finished: ${state.stop_reason ?? state.error} (reward ${state.reward})`);

		const messageInput = el("input", { type: "text", "data-testid": "message-input", placeholder: "say something" });
		const sendButton = el("button", { "data-testid": "send-message" }, "Send");
		sendButton.addEventListener("click", async () => {
			if (!messageInput.value) return;
			await this.model.sendMessage(messageInput.value);
			messageInput.value = "";
			this.renderSession();
		});

		const toolSelect = el("select", { "data-testid": "tool-select" });
		for (const tool of this.model.tools) {
			toolSelect.append(el("option", { value: tool.name }, `${tool.name} [${tool.kind}]`));
		}
		const argsBox = el("div", { class: "tool-args", "data-testid": "tool-args" });
		const renderArgInputs = () => {
			const spec = this.model.tools.find((t) => t.name === toolSelect.value);
			argsBox.replaceChildren();
			for (const param of spec?.params ?? []) {
				argsBox.append(
					el("label", {}, `${param.name}${param.required ? "*" : ""} `,
						el("input", { type: "text", "data-param": param.name, placeholder: param.type })),
				);
			}
		};
		toolSelect.addEventListener("change", renderArgInputs);
		renderArgInputs();

		const invokeButton = el("button", { "data-testid": "invoke-tool" }, "Run tool");
		invokeButton.addEventListener("click", async () => {
			const spec = this.model.tools.find((t) => t.name === toolSelect.value);
			const args: Record<string, unknown> = {};
			for (const input of argsBox.querySelectorAll("input")) {
				const name = input.getAttribute("data-param")!;
				if (input.value === "") continue;
				const type = spec?.params.find((p) => p.name === name)?.type;
				args[name] =
					type === "number" || type === "integer"
						? Number(input.value)
						: type === "boolean"
							? input.value === "true"
							: input.value;
			}
			await this.model.invokeTool(toolSelect.value, args);
			this.renderSession();
		});

		const controlsDisabled = this.model.turn !== "you";
		for (const control of [messageInput, sendButton, toolSelect, invokeButton]) {
			(control as HTMLButtonElement).disabled = controlsDisabled;
		}

		const rewindButton = el("button", { "data-testid": "rewind" }, "Rewind to start");
		rewindButton.addEventListener("click", async () => {
			const forked = await this.model.rewind(0, "restarted from the console");
			this.model.sessionId = forked.sessionId;
			this.model.state = forked.state;
			this.renderSession();
		});

		this.root.replaceChildren(
			el("div", { class: "session" },
				el("h2", {}, `${state.task_id} — you are the ${mine}`),
				turn, transcript,
				el("div", { class: "composer" }, messageInput, sendButton),
				el("div", { class: "toolbox" }, toolSelect, argsBox, invokeButton),
				el("h3", {}, "Evaluation criteria"),
				criteria, rewindButton,
			),
		);
	}
}

export class BrowsePanel {
	readonly browser: TrajectoryBrowser;

	constructor(api: ApiClient, private readonly root: HTMLElement) {
		this.browser = new TrajectoryBrowser(api);
	}

	async init(): Promise<void> {
		await this.browser.loadRuns();
		this.render();
	}

	render(): void {
		const runList = el("ul", { class: "runs", "data-testid": "run-list" });
		for (const run of this.browser.runs) {
			const link = el("a", { href: "#" }, `${run.run_id} (${run.mode}, ${run.n_trajectories} files)`);
			link.addEventListener("click", async (evt) => {
				evt.preventDefault();
				await this.browser.openRun(run.run_id);
				this.renderEntries(run.run_id);
			});
			runList.append(el("li", {}, link));
		}
		this.root.replaceChildren(
			el("div", { class: "browse" },
				el("h2", {}, "Stored runs"),
				this.browser.runs.length ? runList : el("p", { "data-testid": "empty-state" }, "No runs stored yet."),
			),
		);
	}

	private renderEntries(runId: string): void {
		const list = el("ul", { "data-testid": "trajectory-list" });
		for (const entry of this.browser.entries) {
			const link = el("a", { href: "#" }, `${entry.task_id} / trial ${entry.trial_index}`);
			link.addEventListener("click", async (evt) => {
				evt.preventDefault();
				await this.browser.openTrajectory(runId, entry.file);
				this.renderEvents(runId);
			});
			list.append(el("li", {}, link));
		}
		this.root.replaceChildren(el("div", {}, el("h2", {}, runId), list));
	}

	private renderEvents(runId: string): void {
		const controls = el("div", { class: "filters" });
		for (const [label, filter] of [
			["all", {}],
			["agent only", { actor: "agent" }],
			["user only", { actor: "user" }],
			["tools only", { kind: "tool_call" }],
		] as const) {
			const button = el("button", { "data-filter": label }, label);
			button.addEventListener("click", () => {
				this.browser.setFilter(filter as never);
				this.renderEvents(runId);
			});
			controls.append(button);
		}
		const badge =
			this.browser.errorBadgeCount > 0
				? el("span", { class: "badge", "data-testid": "error-badge" },
					`${this.browser.errorBadgeCount} malformed line(s)`)
				: "";
		const eventsBox = el("div", { class: "events", "data-testid": "event-list" });
		for (const event of this.browser.filteredEvents) {
			eventsBox.append(el("pre", { class: "event-row" }, this.browser.describe(event)));
		}
		const record = this.browser.currentRecord;
		const breakdown = el("ul", { class: "criteria", "data-testid": "criterion-breakdown" });
		for (const criterion of record?.criteria ?? []) {
			breakdown.append(
				el("li", { class: criterion.passed ? "pass" : "fail" },
					`${criterion.passed ? "PASS" : "FAIL"} [${criterion.kind}] ${criterion.id}`),
			);
		}
		this.root.replaceChildren(
			el("div", {},
				el("h2", {}, `${runId}: ${this.browser.doc?.header?.task_id ?? ""}`),
				controls, badge, eventsBox,
				el("p", {}, `stop: ${this.browser.doc?.footer?.stop_reason ?? "?"}`
					+ (record ? ` | reward: ${record.reward}` : "")),
				breakdown,
			),
		);
	}
}

export function mountApp(root: HTMLElement, api: ApiClient): { play: PlayConsole; browse: BrowsePanel } {
	const playRoot = el("section", { id: "play" });
	const browseRoot = el("section", { id: "browse" });
	root.replaceChildren(el("h1", {}, "duet review console"), playRoot, browseRoot);
	const play = new PlayConsole(api, playRoot);
	const browse = new BrowsePanel(api, browseRoot);
	return { play, browse };
}
