/**
 * Fixture-backed mock of the engine API for UI development and tests.
 * Every response body comes from fixtures/ verbatim; the transcript
 * endpoint streams the raw fixture bytes so downloads byte-match.
 */

import { existsSync, readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';
import express from 'express';
import type { Request, Response, NextFunction } from 'express';

// ../fixtures from mock/ in source runs, ../../fixtures from dist/mock/ builds
const HERE = dirname(fileURLToPath(import.meta.url));
const FIXTURES_DIR = [join(HERE, '..', 'fixtures'), join(HERE, '..', '..', 'fixtures')].find(
  existsSync,
)!;

export const MOCK_TOKEN = 'learner-0001.fixture-signature';

export function loadFixture(name: string): string {
  return readFileSync(join(FIXTURES_DIR, name), 'utf-8');
}

export function createMockApi(): express.Express {
  const app = express();
  app.use(express.json());

  // permissive CORS so browser (and happy-dom) clients can call the mock
  app.use((req: Request, res: Response, next: NextFunction) => {
    res.set('Access-Control-Allow-Origin', '*');
    res.set('Access-Control-Allow-Headers', 'Authorization, Content-Type');
    res.set('Access-Control-Allow-Methods', 'GET, POST, OPTIONS');
    if (req.method === 'OPTIONS') {
      res.sendStatus(204);
      return;
    }
    next();
  });

  app.post('/auth/login', (req: Request, res: Response) => {
    const email = String(req.body?.email ?? '');
    if (!email.includes('@')) {
      res.status(422).json({ detail: 'invalid email' });
      return;
    }
    res.json({ token: MOCK_TOKEN, learner_id: 'learner-0001' });
  });

  const authenticated = (req: Request, res: Response, next: NextFunction) => {
    if (req.headers.authorization !== `Bearer ${MOCK_TOKEN}`) {
      res.status(401).json({ detail: 'invalid token' });
      return;
    }
    next();
  };
  app.use(authenticated);

  app.post('/sessions', (_req: Request, res: Response) => {
    res.json({ session_id: 'sess-0001' });
  });

  // Scripted turn sequence: exercise issued, then completed, then analysis.
  const turnFixtures = ['turn_issued.json', 'turn_completed.json', 'turn_analysis.json'];
  let turnIndex = 0;
  app.post('/sessions/:id/messages', (req: Request, res: Response) => {
    if (!String(req.body?.text ?? '').trim()) {
      res.status(422).json({ detail: 'empty message text' });
      return;
    }
    const name = turnFixtures[Math.min(turnIndex, turnFixtures.length - 1)];
    turnIndex += 1;
    res.type('application/json').send(loadFixture(name));
  });

  app.post('/sessions/:id/end', (_req: Request, res: Response) => {
    res.json({ summary: 'A friendly chat about ordering coffee.', degraded: false });
  });

  app.get('/sessions/:id/transcript', (req: Request, res: Response) => {
    if (req.query.format === 'text') {
      res.type('text/plain').send('[22:13] Learner: Hello, I want practice ordering coffee.\n');
      return;
    }
    // raw bytes, not re-serialized, so the download is byte-identical
    res.type('application/json').send(loadFixture('transcript.json'));
  });

  app.get('/dashboard', (_req: Request, res: Response) => {
    res.type('application/json').send(loadFixture('dashboard.json'));
  });

  return app;
}

const isMain =
  typeof process.argv[1] === 'string' &&
  fileURLToPath(import.meta.url) === process.argv[1];

if (isMain) {
  const port = Number(process.env.PORT ?? 8100);
  createMockApi().listen(port, () => {
    console.log(`mock api listening on http://127.0.0.1:${port}`);
  });
}
