/** Typed client for the workbench HTTP API. */

import type { ImageInfo, ProfileDocument, RunResponse } from './types.js';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

/** 502: the model adapter behind the service is unreachable. */
export class BackendDownError extends ApiError {
  constructor(message: string) {
    super(502, message);
    this.name = 'BackendDownError';
  }
}

/** 409: the profile was modified since this document was loaded. */
export class StaleProfileError extends ApiError {
  constructor(message: string) {
    super(409, message);
    this.name = 'StaleProfileError';
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  let message = `HTTP ${resp.status}`;
  try {
    const body = (await resp.json()) as { error?: string };
    if (body && typeof body.error === 'string') message = body.error;
  } catch {
    /* non-JSON error body */
  }
  if (resp.status === 502) return new BackendDownError(message);
  if (resp.status === 409) return new StaleProfileError(message);
  return new ApiError(resp.status, message);
}

export class ApiClient {
  constructor(readonly baseUrl: string = '') {}

  private async get<T>(path: string): Promise<T> {
    const resp = await fetch(`${this.baseUrl}${path}`);
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as T;
  }

  private async send<T>(method: string, path: string, body: unknown): Promise<T> {
    const resp = await fetch(`${this.baseUrl}${path}`, {
      method,
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as T;
  }

  health(): Promise<{ status: string; dataset: string; images: number }> {
    return this.get('/api/health');
  }

  async listImages(): Promise<ImageInfo[]> {
    const body = await this.get<{ images: ImageInfo[] }>('/api/images');
    return body.images;
  }

  imagePngUrl(imageId: string): string {
    return `${this.baseUrl}/api/images/${imageId}/png`;
  }

  async listProfiles(): Promise<{ id: string; display_name: string; version: number }[]> {
    const body = await this.get<{ profiles: { id: string; display_name: string; version: number }[] }>(
      '/api/profiles',
    );
    return body.profiles;
  }

  getProfile(id: string): Promise<ProfileDocument> {
    return this.get(`/api/profiles/${encodeURIComponent(id)}`);
  }

  putProfile(doc: ProfileDocument): Promise<ProfileDocument> {
    return this.send('PUT', `/api/profiles/${encodeURIComponent(doc.id)}`, doc);
  }

  run(imageId: string, profile: ProfileDocument, mode: 'saa' | 'saa+'): Promise<RunResponse> {
    return this.send('POST', '/api/run', { image_id: imageId, profile, mode });
  }
}
