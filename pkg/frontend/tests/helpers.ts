import type { AddressInfo } from 'node:net';
import type { Server } from 'node:http';
import { createMockApi } from '../mock/server.js';

export interface RunningMock {
  baseUrl: string;
  close: () => Promise<void>;
}

export function startMockApi(): Promise<RunningMock> {
  return new Promise((resolve) => {
    const server: Server = createMockApi().listen(0, '127.0.0.1', () => {
      const { port } = server.address() as AddressInfo;
      resolve({
        baseUrl: `http://127.0.0.1:${port}`,
        close: () => new Promise((done) => server.close(() => done())),
      });
    });
  });
}
