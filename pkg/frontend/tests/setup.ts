// jsdom has no 2D canvas; the renderer skips painting when the context is
// unavailable, so stub it quietly instead of logging "not implemented".
Object.defineProperty(HTMLCanvasElement.prototype, "getContext", {
  value: () => null,
  writable: true,
});
