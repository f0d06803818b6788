// the live test spawns the engine process, so give hooks room to breathe
export default {
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
    testTimeout: 20000,
    hookTimeout: 20000,
  },
};
