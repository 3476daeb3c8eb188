import { ApiClient } from "./api.js";
import { App } from "./app.js";

const mount = document.getElementById("app");
if (!mount) {
  throw new Error("missing #app mount point");
}

const api = new ApiClient("", (url, init) => window.fetch(url, init));
const app = new App(document, api, mount, window);

window.addEventListener("hashchange", () => {
  void app.handleHash(window.location.hash || "#/");
});

app.start();
