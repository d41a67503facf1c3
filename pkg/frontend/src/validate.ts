/** Client-side upload pre-checks.
 *
 * These duplicate the server rules purely for responsiveness; the server
 * remains authoritative. Dimensions are read from the png/jpeg header
 * bytes so no decode or network round trip is needed.
 */

export const MIN_DIM = 100;
export const MAX_DIM = 2000;

export interface UploadCheck {
  ok: boolean;
  reason?: string;
  width?: number;
  height?: number;
}

function isPng(bytes: Uint8Array): boolean {
  const sig = [0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a];
  return bytes.length >= 8 && sig.every((b, i) => bytes[i] === b);
}

function isJpeg(bytes: Uint8Array): boolean {
  return bytes.length >= 2 && bytes[0] === 0xff && bytes[1] === 0xd8;
}

function readU32(bytes: Uint8Array, offset: number): number {
  return (
    (bytes[offset] << 24) | (bytes[offset + 1] << 16) | (bytes[offset + 2] << 8) | bytes[offset + 3]
  ) >>> 0;
}

function pngDimensions(bytes: Uint8Array): [number, number] | null {
  // IHDR is the first chunk: length(4) type(4) width(4) height(4)
  if (bytes.length < 24) return null;
  const type = String.fromCharCode(bytes[12], bytes[13], bytes[14], bytes[15]);
  if (type !== "IHDR") return null;
  return [readU32(bytes, 16), readU32(bytes, 20)];
}

function jpegDimensions(bytes: Uint8Array): [number, number] | null {
  // walk the marker segments until a start-of-frame carries the size
  let pos = 2;
  while (pos + 9 < bytes.length) {
    if (bytes[pos] !== 0xff) {
      pos += 1;
      continue;
    }
    const marker = bytes[pos + 1];
    if (marker === 0xd8 || (marker >= 0xd0 && marker <= 0xd7) || marker === 0x01 || marker === 0xff) {
      pos += 2;
      continue;
    }
    const length = (bytes[pos + 2] << 8) | bytes[pos + 3];
    const isSof =
      marker >= 0xc0 && marker <= 0xcf && marker !== 0xc4 && marker !== 0xc8 && marker !== 0xcc;
    if (isSof) {
      const height = (bytes[pos + 5] << 8) | bytes[pos + 6];
      const width = (bytes[pos + 7] << 8) | bytes[pos + 8];
      return [width, height];
    }
    pos += 2 + length;
  }
  return null;
}

/** Validate name/bytes before any network request is issued. */
export function checkUpload(filename: string, bytes: Uint8Array): UploadCheck {
  const suffix = filename.includes(".") ? filename.split(".").pop()!.toLowerCase() : "";
  if (!["png", "jpg", "jpeg"].includes(suffix)) {
    return { ok: false, reason: `unsupported format .${suffix}; expected png or jpeg` };
  }

  let dims: [number, number] | null = null;
  if (isPng(bytes)) {
    dims = pngDimensions(bytes);
  } else if (isJpeg(bytes)) {
    dims = jpegDimensions(bytes);
  } else {
    return { ok: false, reason: "file content is not a valid png/jpeg stream" };
  }
  if (!dims) {
    return { ok: false, reason: "could not read image dimensions from the file header" };
  }
  const [width, height] = dims;
  if (width < MIN_DIM || height < MIN_DIM || width > MAX_DIM || height > MAX_DIM) {
    return {
      ok: false,
      reason:
        `image is ${width}x${height} px; each dimension must be within ` +
        `${MIN_DIM}x${MIN_DIM} and ${MAX_DIM}x${MAX_DIM}`,
      width,
      height,
    };
  }
  return { ok: true, width, height };
}
