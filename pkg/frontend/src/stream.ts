// Server-sent-events subscription on top of fetch streaming, so the same
// code runs in the browser and in node-based tests. One subscription per
// console; the caller reconnects on failure.

import type { FetchLike } from "./api.js";

export interface StreamEvent {
  type: string;
  data: Record<string, unknown>;
}

export async function subscribeEvents(
  url: string,
  fetchImpl: FetchLike,
  onEvent: (event: StreamEvent) => void,
  signal?: AbortSignal,
): Promise<void> {
  const resp = await fetchImpl(url, { signal } as RequestInit);
  if (!resp.ok || !resp.body) {
    throw new Error(`stream failed: HTTP ${resp.status}`);
  }
  const reader = resp.body.getReader();
  const decoder = new TextDecoder();
  let buffer = "";
  for (;;) {
    const { value, done } = await reader.read();
    if (done) return;
    buffer += decoder.decode(value, { stream: true });
    let sep;
    while ((sep = buffer.indexOf("\n\n")) >= 0) {
      const block = buffer.slice(0, sep);
      buffer = buffer.slice(sep + 2);
      let type = "message";
      let data = "";
      for (const line of block.split("\n")) {
        if (line.startsWith("event:")) type = line.slice(6).trim();
        else if (line.startsWith("data:")) data += line.slice(5).trim();
      }
      if (data) {
        try {
          onEvent({ type, data: JSON.parse(data) });
        } catch {
          // malformed frame: skip, keep the stream alive
        }
      }
    }
  }
}
