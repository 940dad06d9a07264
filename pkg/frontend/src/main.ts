import { PipeforgeClient } from "./api.js";
import { initApp } from "./app.js";

const params = new URLSearchParams(window.location.search);
const apiBase = params.get("api") ?? "http://127.0.0.1:8080";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

initApp(root, new PipeforgeClient(apiBase)).catch((error) => {
  root.textContent = `failed to start: ${String(error)}`;
});
