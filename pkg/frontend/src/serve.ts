/**
 * Dev server: static files plus an /api proxy to the topicloop service,
 * so the browser client needs no CORS setup.
 *
 *   node dist/serve.js --port 5173 --api http://127.0.0.1:8000
 */
import { createServer, type IncomingMessage, type ServerResponse } from 'node:http';
import { readFile } from 'node:fs/promises';
import { dirname, extname, join, normalize } from 'node:path';
import { fileURLToPath } from 'node:url';
import { parseArgs } from 'node:util';

const { values } = parseArgs({
  options: {
    port: { type: 'string', default: '5173' },
    api: { type: 'string', default: 'http://127.0.0.1:8000' },
  },
});

const here = dirname(fileURLToPath(import.meta.url));
const publicDir = join(here, '..', 'public');

const MIME: Record<string, string> = {
  '.html': 'text/html; charset=utf-8',
  '.js': 'text/javascript',
  '.css': 'text/css',
  '.map': 'application/json',
  '.json': 'application/json',
  '.svg': 'image/svg+xml',
};

async function serveFile(res: ServerResponse, root: string, rel: string): Promise<void> {
  const path = normalize(join(root, rel));
  if (!path.startsWith(root)) {
    res.writeHead(403).end();
    return;
  }
  try {
    const body = await readFile(path);
    res.writeHead(200, { 'Content-Type': MIME[extname(path)] ?? 'application/octet-stream' });
    res.end(body);
  } catch {
    res.writeHead(404, { 'Content-Type': 'text/plain' }).end('not found');
  }
}

function readBody(req: IncomingMessage): Promise<Uint8Array<ArrayBuffer>> {
  return new Promise((resolve, reject) => {
    const chunks: Buffer[] = [];
    req.on('data', (chunk: Buffer) => chunks.push(chunk));
    req.on('end', () => resolve(new Uint8Array(Buffer.concat(chunks))));
    req.on('error', reject);
  });
}

async function proxy(req: IncomingMessage, res: ServerResponse, url: URL): Promise<void> {
  const target = values.api + url.pathname.slice('/api'.length) + url.search;
  const method = req.method ?? 'GET';
  try {
    const body = ['GET', 'HEAD'].includes(method) ? undefined : await readBody(req);
    const upstream = await fetch(target, {
      method,
      headers: { 'content-type': req.headers['content-type'] ?? 'application/json' },
      body,
    });
    const headers: Record<string, string> = {};
    for (const name of ['content-type', 'content-disposition']) {
      const value = upstream.headers.get(name);
      if (value) headers[name] = value;
    }
    res.writeHead(upstream.status, headers);
    res.end(Buffer.from(await upstream.arrayBuffer()));
  } catch (err) {
    res.writeHead(502, { 'Content-Type': 'application/json' });
    res.end(JSON.stringify({ detail: `service unreachable at ${values.api}: ${String(err)}` }));
  }
}

const server = createServer((req, res) => {
  const url = new URL(req.url ?? '/', 'http://localhost');
  const path = url.pathname;
  if (path.startsWith('/api/')) {
    void proxy(req, res, url);
  } else if (path.startsWith('/dist/')) {
    void serveFile(res, here, path.slice('/dist/'.length));
  } else if (path === '/') {
    void serveFile(res, publicDir, 'index.html');
  } else {
    void serveFile(res, publicDir, path.slice(1));
  }
});

const port = Number(values.port);
server.listen(port, () => {
  console.log(`ui on http://127.0.0.1:${port}, proxying /api to ${values.api}`);
});
