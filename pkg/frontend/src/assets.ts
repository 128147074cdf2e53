// Decode the bundle's base64 PPM/PGM assets into RGBA pixels and paint
// them onto canvases. jsdom has no 2D context, so painting degrades to a
// no-op there; the DOM structure stays identical either way.

export interface DecodedImage {
  width: number;
  height: number;
  channels: number;
  rgba: Uint8ClampedArray;
}

function base64Bytes(b64: string): Uint8Array {
  const bin = atob(b64);
  const out = new Uint8Array(bin.length);
  for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
  return out;
}

export function decodePpm(b64: string): DecodedImage {
  const bytes = base64Bytes(b64);
  let pos = 0;
  const isSpace = (c: number) => c === 32 || c === 9 || c === 10 || c === 13;

  const token = (): string => {
    while (pos < bytes.length) {
      if (bytes[pos] === 35) {
        // comment: skip to end of line
        while (pos < bytes.length && bytes[pos] !== 10) pos++;
      } else if (isSpace(bytes[pos])) {
        pos++;
      } else {
        break;
      }
    }
    const start = pos;
    while (pos < bytes.length && !isSpace(bytes[pos])) pos++;
    return String.fromCharCode(...bytes.subarray(start, pos));
  };

  const magic = token();
  if (magic !== "P6" && magic !== "P5") {
    throw new Error(`unsupported raster magic ${magic}`);
  }
  const channels = magic === "P6" ? 3 : 1;
  const width = parseInt(token(), 10);
  const height = parseInt(token(), 10);
  const maxval = parseInt(token(), 10);
  if (!(width >= 1) || !(height >= 1) || maxval !== 255) {
    throw new Error("bad raster header");
  }
  pos++; // single whitespace after maxval
  const need = width * height * channels;
  if (bytes.length - pos < need) {
    throw new Error("truncated raster payload");
  }
  const rgba = new Uint8ClampedArray(width * height * 4);
  for (let i = 0; i < width * height; i++) {
    const src = pos + i * channels;
    rgba[i * 4] = bytes[src];
    rgba[i * 4 + 1] = channels === 3 ? bytes[src + 1] : bytes[src];
    rgba[i * 4 + 2] = channels === 3 ? bytes[src + 2] : bytes[src];
    rgba[i * 4 + 3] = 255;
  }
  return { width, height, channels, rgba };
}

export function assetCanvas(b64: string, className: string): HTMLCanvasElement {
  const img = decodePpm(b64);
  const canvas = document.createElement("canvas");
  canvas.width = img.width;
  canvas.height = img.height;
  canvas.className = className;
  canvas.dataset.width = String(img.width);
  canvas.dataset.height = String(img.height);
  const ctx = canvas.getContext?.("2d");
  if (ctx) {
    const data = new ImageData(img.rgba, img.width, img.height);
    ctx.putImageData(data, 0, 0);
  }
  return canvas;
}
