import { App } from "./app.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("service") ?? "http://127.0.0.1:8321";
const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app container");
}
const app = new App({ baseUrl, root });
const sessionId = params.get("session");
if (sessionId) {
  void app.loadSession(sessionId);
}

declare global {
  interface Window {
    __app: App;
  }
}
window.__app = app;
