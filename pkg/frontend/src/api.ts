import type {
  ApiErrorBody,
  ClassDetail,
  ClassSummary,
  DomainSpecDoc,
  DomainSummary,
  ExtractedBlockDoc,
  RuleSetDoc,
  ValidationReportDoc,
} from './types.js';

export class ApiRequestError extends Error {
  constructor(
    readonly status: number,
    readonly body: ApiErrorBody,
  ) {
    super(`${body.code}: ${body.message}`);
  }
}

/** Thin typed client for the validation service. */
export class SdovalClient {
  constructor(readonly baseUrl: string = '') {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, init);
    const text = await response.text();
    const body = text ? JSON.parse(text) : null;
    if (!response.ok) {
      const error: ApiErrorBody =
        body && typeof body === 'object' && 'error' in body
          ? (body.error as ApiErrorBody)
          : { code: `HTTP${response.status}`, message: text || response.statusText };
      throw new ApiRequestError(response.status, error);
    }
    return body as T;
  }

  health(): Promise<{ status: string; vocabularyVersion: string }> {
    return this.request('/api/health');
  }

  searchClasses(query: string): Promise<ClassSummary[]> {
    return this.request(`/api/vocabulary/classes?query=${encodeURIComponent(query)}`);
  }

  classDetail(name: string): Promise<ClassDetail> {
    return this.request(`/api/vocabulary/classes/${encodeURIComponent(name)}`);
  }

  listDomains(): Promise<DomainSummary[]> {
    return this.request('/api/domains');
  }

  getDomain(id: string): Promise<DomainSpecDoc> {
    return this.request(`/api/domains/${encodeURIComponent(id)}`);
  }

  saveDomain(doc: DomainSpecDoc): Promise<DomainSpecDoc> {
    return this.request(`/api/domains/${encodeURIComponent(doc.id)}`, {
      method: 'PUT',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(doc),
    });
  }

  deleteDomain(id: string): Promise<void> {
    return this.request(`/api/domains/${encodeURIComponent(id)}`, { method: 'DELETE' });
  }

  getRules(domainId: string): Promise<RuleSetDoc> {
    return this.request(`/api/domains/${encodeURIComponent(domainId)}/rules`);
  }

  saveRules(domainId: string, doc: RuleSetDoc): Promise<RuleSetDoc> {
    return this.request(`/api/domains/${encodeURIComponent(domainId)}/rules`, {
      method: 'PUT',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(doc),
    });
  }

  /** The annotation is sent as raw text so the report sees the exact bytes. */
  validate(
    domainId: string,
    annotationText: string,
    ruleSetId?: string,
  ): Promise<ValidationReportDoc> {
    const body: Record<string, unknown> = { domainId, annotation: annotationText };
    if (ruleSetId) body.ruleSetId = ruleSetId;
    return this.request('/api/validate', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  extractHtml(html: string): Promise<ExtractedBlockDoc[]> {
    return this.request('/api/extract', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ html }),
    });
  }

  extractUrl(url: string): Promise<ExtractedBlockDoc[]> {
    return this.request('/api/extract', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ url }),
    });
  }
}
