// jsdom has no canvas implementation; the renderer no-ops on a null
// context, so return null quietly instead of jsdom's noisy stub.
HTMLCanvasElement.prototype.getContext = (() => null) as typeof HTMLCanvasElement.prototype.getContext;
