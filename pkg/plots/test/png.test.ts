import { inflateSync } from "node:zlib";
import { describe, expect, it } from "vitest";

import { encodePng } from "../src/png.js";

function idatPayload(png: Buffer): Buffer {
  let offset = 8;
  const chunks: Buffer[] = [];
  while (offset < png.length) {
    const len = png.readUInt32BE(offset);
    const type = png.subarray(offset + 4, offset + 8).toString("ascii");
    if (type === "IDAT") chunks.push(png.subarray(offset + 8, offset + 8 + len));
    offset += 12 + len;
  }
  return inflateSync(Buffer.concat(chunks));
}

describe("png encoder", () => {
  it("writes signature, dimensions and recoverable pixels", () => {
    const rgba = new Uint8Array([255, 0, 0, 255, 0, 0, 255, 255]); // red, blue
    const png = encodePng(2, 1, rgba);
    expect([...png.subarray(0, 8)]).toEqual([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);
    expect(png.readUInt32BE(16)).toBe(2); // width from IHDR
    expect(png.readUInt32BE(20)).toBe(1);
    const raw = idatPayload(png);
    expect(raw[0]).toBe(0); // filter byte
    expect([...raw.subarray(1)]).toEqual([...rgba]);
  });

  it("round-trips a multi-row image", () => {
    const w = 3;
    const h = 4;
    const rgba = new Uint8Array(w * h * 4).map((_, i) => (i * 37) % 256);
    const raw = idatPayload(encodePng(w, h, rgba));
    for (let y = 0; y < h; y++) {
      expect(raw[y * (1 + w * 4)]).toBe(0);
      const row = raw.subarray(y * (1 + w * 4) + 1, (y + 1) * (1 + w * 4));
      expect([...row]).toEqual([...rgba.subarray(y * w * 4, (y + 1) * w * 4)]);
    }
  });

  it("rejects inconsistent buffer sizes", () => {
    expect(() => encodePng(2, 2, new Uint8Array(3))).toThrow(/length/);
  });
});
