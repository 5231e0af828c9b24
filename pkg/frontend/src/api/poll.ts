/**
 * Poll a submitted job until it reaches a terminal state.
 *
 * Model updates take tens of seconds on real corpora, so submissions are
 * acknowledged immediately and progress arrives by polling. One second is
 * the default cadence; tests shrink it to keep the suite fast.
 */
import type { ApiClient } from './client.js';
import type { Job, JobTicket } from './types.js';

export interface PollOptions {
  intervalMs?: number;
  onProgress?: (job: Job) => void;
}

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

/**
 * Resolve with the finished job, or reject with the job's error message.
 * The ticket alone is not trusted even when it already looks terminal: the
 * job record is fetched at least once so callers always see full progress
 * fields.
 */
export async function pollJob(
  client: ApiClient,
  ticket: JobTicket,
  options: PollOptions = {},
): Promise<Job> {
  const intervalMs = options.intervalMs ?? 1000;
  for (;;) {
    const job = await client.job(ticket.job_id);
    options.onProgress?.(job);
    if (job.status === 'done') {
      return job;
    }
    if (job.status === 'failed') {
      throw new Error(job.error ?? 'job failed');
    }
    await sleep(intervalMs);
  }
}
