// Validation console: paste an annotation or pull one off a page, pick a
// domain and optional rule set, and read the staged report.

import { ApiRequestError, SdovalClient } from './api.js';
import { clear, el } from './dom.js';
import type { ExtractedBlockDoc, ValidationReportDoc } from './types.js';

export class ValidationConsole {
  readonly root: HTMLElement;
  report: ValidationReportDoc | null = null;
  private domains: { id: string; hasRules: boolean; ruleSetId?: string }[] = [];
  readonly annotationInput = el('textarea', {
    rows: '14',
    placeholder: 'paste a JSON-LD annotation',
    'data-testid': 'annotation-input',
  });
  readonly domainSelect = el('select', { 'data-testid': 'domain-select' });
  readonly rulesToggle = el('input', { type: 'checkbox', 'data-testid': 'use-rules' });
  private urlInput = el('input', { placeholder: 'or fetch a page by URL',
    'data-testid': 'url-input' });
  private blocksBox = el('div', { class: 'blocks' });
  private reportBox = el('div', { class: 'report', 'data-testid': 'report' });
  private errorBox = el('p', { class: 'issue', 'data-testid': 'console-error' });

  constructor(private client: SdovalClient) {
    this.root = el('section', { class: 'console' });
    this.render();
  }

  async refreshDomains(): Promise<void> {
    const listing = await this.client.listDomains();
    this.domains = [];
    for (const entry of listing) {
      let ruleSetId: string | undefined;
      if (entry.hasRules) {
        ruleSetId = (await this.client.getRules(entry.id)).id;
      }
      this.domains.push({ id: entry.id, hasRules: entry.hasRules, ruleSetId });
    }
    clear(this.domainSelect);
    for (const domain of this.domains) {
      this.domainSelect.append(el('option', { value: domain.id }, domain.id));
    }
  }

  async extractFromUrl(url: string): Promise<void> {
    this.renderBlocks(await this.client.extractUrl(url));
  }

  async extractFromHtml(html: string): Promise<void> {
    this.renderBlocks(await this.client.extractHtml(html));
  }

  private renderBlocks(blocks: ExtractedBlockDoc[]): void {
    clear(this.blocksBox);
    if (blocks.length === 0) {
      this.blocksBox.append(el('p', {}, 'No ld+json blocks found on the page.'));
      return;
    }
    for (const block of blocks) {
      if (block.error) {
        this.blocksBox.append(
          el('p', { class: 'issue' },
            `block ${block.index}: ${block.error.code} ${block.error.message}`),
        );
        continue;
      }
      this.blocksBox.append(
        el('button', {
          'data-testid': `use-block-${block.index}`,
          onclick: () => {
            this.annotationInput.value = JSON.stringify(block.parsed, null, 2);
          },
        }, `use block ${block.index}`),
      );
    }
  }

  async validate(): Promise<ValidationReportDoc | null> {
    this.errorBox.textContent = '';
    const domainId = this.domainSelect.value;
    const domain = this.domains.find((d) => d.id === domainId);
    const ruleSetId =
      this.rulesToggle.checked && domain?.hasRules ? domain.ruleSetId : undefined;
    try {
      this.report = await this.client.validate(
        domainId, this.annotationInput.value, ruleSetId,
      );
    } catch (error) {
      this.report = null;
      this.errorBox.textContent =
        error instanceof ApiRequestError
          ? `${error.body.code}: ${error.body.message}`
          : `network failure: ${(error as Error).message}`;
      this.renderReport();
      return null;
    }
    this.renderReport();
    return this.report;
  }

  private severityBadge(severity: string): HTMLElement {
    return el('span', { class: `badge badge-${severity.toLowerCase()}` }, severity);
  }

  private renderReport(): void {
    clear(this.reportBox);
    if (!this.report) return;
    const report = this.report;
    this.reportBox.append(
      el('div', {
        class: `verdict verdict-${report.verdict.toLowerCase()}`,
        'data-testid': 'verdict',
      }, report.verdict),
    );
    if (report.syntax) {
      this.reportBox.append(
        el('h4', {}, 'Syntax'),
        el('div', { class: 'violation', 'data-testid': 'syntax-violation' },
          this.severityBadge('Error'),
          el('code', {}, ` ${report.syntax.code} `),
          el('span', {}, report.syntax.message),
        ),
      );
    }
    if (report.completeness.length > 0) {
      this.reportBox.append(el('h4', {}, 'Completeness'));
      for (const violation of report.completeness) {
        this.reportBox.append(
          el('div', { class: 'violation', 'data-testid': `completeness-${violation.path}` },
            this.severityBadge(violation.severity),
            el('code', {}, ` ${violation.code} ${violation.path || '/'} `),
            el('span', {}, `expected ${violation.expected}, found ${violation.found}`),
          ),
        );
      }
    }
    if (report.rules.length > 0) {
      this.reportBox.append(el('h4', {}, 'Consistency rules'));
      for (const violation of report.rules) {
        const bindings = Object.entries(violation.bindings)
          .map(([path, value]) => `${path} = ${value}`)
          .join('; ');
        this.reportBox.append(
          el('div', { class: 'violation', 'data-testid': `rule-${violation.ruleId}` },
            this.severityBadge(violation.severity),
            el('code', {}, ` ${violation.ruleId} ${violation.nodePath || '/'} `),
            el('span', {}, violation.message),
            el('small', {}, bindings ? ` (${bindings})` : ''),
          ),
        );
      }
    }
    if (report.diagnostics.length > 0) {
      this.reportBox.append(el('h4', {}, 'Engine diagnostics'));
      for (const note of report.diagnostics) {
        this.reportBox.append(el('div', { class: 'violation' },
          this.severityBadge('Warning'), el('span', {}, ` ${note}`)));
      }
    }
  }

  private render(): void {
    clear(this.root);
    const extractButton = el('button', {
      'data-testid': 'extract-url',
      onclick: () =>
        void this.extractFromUrl(this.urlInput.value).catch((error: Error) => {
          this.errorBox.textContent =
            error instanceof ApiRequestError
              ? `${error.body.code}: ${error.body.message}`
              : error.message;
        }),
    }, 'extract');
    const validateButton = el('button', {
      'data-testid': 'run-validation',
      onclick: () => void this.validate(),
    }, 'validate');

    this.root.append(
      el('h2', {}, 'Validation console'),
      this.annotationInput,
      el('div', { class: 'url-row' }, this.urlInput, extractButton),
      this.blocksBox,
      el('div', { class: 'controls' },
        el('label', {}, 'domain '), this.domainSelect,
        el('label', {}, ' apply rules '), this.rulesToggle,
        validateButton,
      ),
      this.errorBox,
      this.reportBox,
    );
  }
}
