// Browser entry point: wire the app to the page and keep one stream
// subscription alive, reconnecting with backoff.

import { ConsoleApp } from "./app.js";

const base = (window as unknown as { HAPTIFORGE_BASE?: string }).HAPTIFORGE_BASE
  ?? window.location.origin;

const app = new ConsoleApp(document, {
  map: document.getElementById("hand-map")!,
  session: document.getElementById("session")!,
  controls: document.getElementById("controls")!,
  status: document.getElementById("status")!,
}, base);

async function run(): Promise<void> {
  for (;;) {
    try {
      await app.connect();
      await app.runStream();
    } catch (err) {
      console.error("console connection lost", err);
    }
    await new Promise((resolve) => setTimeout(resolve, 1000));
  }
}

void run();
