/**
 * Standalone bootstrap
 *
 * Connects to a running service, provisions a small demo pipeline
 * (generated dataset, logistic model, boundary job), waits for the job,
 * and mounts the explorer on it.
 */

import { ServiceClient } from './api';
import { ExplorerApp } from './app';

const SERVICE_URL = new URLSearchParams(location.search).get('service') ?? 'http://127.0.0.1:8000';

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function bootstrap(): Promise<void> {
  const root = document.getElementById('app');
  if (root === null) {
    throw new Error('missing #app mount point');
  }
  const client = new ServiceClient(SERVICE_URL);
  const status = document.createElement('p');
  status.textContent = `provisioning demo artifacts on ${SERVICE_URL} ...`;
  root.append(status);

  const summary = await client.createGeneratedDataset({
    n_samples: 600,
    n_features: 2,
    class_sep: 3.0,
    seed: 0,
  });
  const model = await client.trainModel(summary.id, 'logistic');
  const job = await client.startBoundary({ model_id: model.id, threshold_t: 4000, seed: 0 });
  for (;;) {
    const state = await client.boundaryStatus(job.id);
    if (state.status === 'done') {
      break;
    }
    if (state.status === 'error') {
      throw new Error(state.error ?? 'boundary job failed');
    }
    status.textContent = `boundary job: ${state.pairs_done}/${state.pairs_total} pairs`;
    await sleep(150);
  }
  status.remove();

  const app = new ExplorerApp(root, client);
  await app.load(summary, job.id);
  app.pickInstance(0);
}

bootstrap().catch((err) => {
  const root = document.getElementById('app');
  if (root !== null) {
    root.textContent = `failed to start: ${err instanceof Error ? err.message : String(err)}`;
  }
});
