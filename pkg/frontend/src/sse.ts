// Incremental parser for the server's event stream ("id:" / "event:" /
// "data:" fields, frames separated by a blank line). Chunk boundaries may
// fall anywhere, including inside a field name.

export interface SSEFrame {
  id: string;
  event: string;
  data: string;
}

export class SSEParser {
  private buf = "";
  private id = "";
  private event = "";
  private data: string[] = [];

  feed(chunk: string): SSEFrame[] {
    this.buf += chunk;
    const frames: SSEFrame[] = [];
    let nl: number;
    while ((nl = this.buf.indexOf("\n")) >= 0) {
      let line = this.buf.slice(0, nl);
      this.buf = this.buf.slice(nl + 1);
      if (line.endsWith("\r")) line = line.slice(0, -1);
      if (line === "") {
        if (this.id !== "" || this.event !== "" || this.data.length > 0) {
          frames.push({
            id: this.id,
            event: this.event,
            data: this.data.join("\n"),
          });
        }
        this.id = "";
        this.event = "";
        this.data = [];
        continue;
      }
      if (line.startsWith(":")) continue; // comment line
      const colon = line.indexOf(":");
      const field = colon < 0 ? line : line.slice(0, colon);
      let value = colon < 0 ? "" : line.slice(colon + 1);
      if (value.startsWith(" ")) value = value.slice(1);
      if (field === "id") this.id = value;
      else if (field === "event") this.event = value;
      else if (field === "data") this.data.push(value);
    }
    return frames;
  }
}
