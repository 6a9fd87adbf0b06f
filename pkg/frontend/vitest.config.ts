import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    include: ['tests/**/*.test.ts'],
    environment: 'node',
    // The scripted session test measures tick rate; keep files sequential
    // so a parallel worker cannot starve it.
    fileParallelism: false,
  },
});
