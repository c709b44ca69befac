// Browser bootstrap: the API lives on the same origin as the static bundle.

import { ApiClient } from "./api.js";
import { mountApp } from "./dom.js";

const root = document.getElementById("app");
if (root) {
	const api = new ApiClient(window.location.origin);
	const { play, browse } = mountApp(root, api);
	void play.init();
	void browse.init();
}
