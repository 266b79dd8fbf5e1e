/** Wire types for the device portal JSON API. */
export {};
