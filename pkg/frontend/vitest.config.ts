import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // DOM-dependent suites opt into happy-dom with a file-level
    // @vitest-environment pragma; everything else runs under plain node.
    environment: "node",
  },
});
