// Scripted UI walkthrough against the real validation service: the use-case
// flows (missing currency -> country-code mismatch -> valid) run through the
// validation console, and the domain editor rebuilds the lodging domain and
// saves it with zero issues.

import { ChildProcess, spawn } from 'node:child_process';
import { mkdtempSync, readFileSync } from 'node:fs';
import net from 'node:net';
import { tmpdir } from 'node:os';
import path from 'node:path';

import { afterAll, beforeAll, beforeEach, describe, expect, test } from 'vitest';

import { SdovalClient } from '../src/api.js';
import { ValidationConsole } from '../src/console.js';
import { DomainEditor } from '../src/domainEditor.js';
import { RuleDesigner } from '../src/ruleDesigner.js';

const REPO_ROOT = path.resolve(__dirname, '..', '..');
const FIXTURES = path.join(REPO_ROOT, 'fixtures');
const COUNTRY_MESSAGE =
  'The international country code of the phone number of the place is not consistent with the country of the address.';

let service: ChildProcess;
let baseUrl: string;
let client: SdovalClient;

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = net.createServer();
    server.listen(0, '127.0.0.1', () => {
      const address = server.address();
      server.close(() =>
        typeof address === 'object' && address
          ? resolve(address.port)
          : reject(new Error('no port')),
      );
    });
  });
}

async function waitFor<T>(probe: () => T | null | undefined, timeoutMs = 8000): Promise<T> {
  const started = Date.now();
  for (;;) {
    const value = probe();
    if (value) return value;
    if (Date.now() - started > timeoutMs) throw new Error('timed out waiting for UI state');
    await new Promise((resolve) => setTimeout(resolve, 25));
  }
}

function q<T extends HTMLElement>(root: HTMLElement, testId: string): T | null {
  return root.querySelector(`[data-testid="${testId}"]`) as T | null;
}

async function click(root: HTMLElement, testId: string): Promise<void> {
  const target = await waitFor(() => q<HTMLElement>(root, testId));
  target.click();
}

function setInput(element: HTMLInputElement | HTMLTextAreaElement, value: string,
  eventType = 'change'): void {
  element.value = value;
  element.dispatchEvent(new Event(eventType, { bubbles: true }));
}

beforeAll(async () => {
  const port = await freePort();
  baseUrl = `http://127.0.0.1:${port}`;
  const store = mkdtempSync(path.join(tmpdir(), 'sdoval-ui-'));
  service = spawn(
    'python3',
    ['-m', 'sdoval.cli', 'serve', '--port', String(port), '--host', '127.0.0.1',
     '--store', store],
    { cwd: REPO_ROOT, stdio: ['ignore', 'pipe', 'pipe'] },
  );
  client = new SdovalClient(baseUrl);
  const started = Date.now();
  for (;;) {
    try {
      const health = await client.health();
      if (health.status === 'ok') break;
    } catch {
      if (Date.now() - started > 30000) throw new Error('service did not come up');
      await new Promise((resolve) => setTimeout(resolve, 200));
    }
  }
  // seed the shipped lodging domain; its rule set is authored through the UI below
  const spec = readFileSync(path.join(FIXTURES, 'lodging.domain.json'), 'utf-8');
  await fetch(`${baseUrl}/api/domains`, { method: 'POST', body: spec });
}, 60000);

afterAll(() => {
  service?.kill();
});

beforeEach(() => {
  localStorage.clear();
  document.body.innerHTML = '';
});

describe('rule designer flow', () => {
  test('authors the country-code rule and reads it back verbatim', async () => {
    const designer = new RuleDesigner(client);
    document.body.append(designer.root);
    await designer.loadDomain('lodging');

    const scopeSelect = await waitFor(() =>
      q<HTMLSelectElement>(designer.root, 'rule-scope'));
    expect([...scopeSelect.options].map((o) => o.value)).toContain('LodgingBusiness');

    setInput(q<HTMLInputElement>(designer.root, 'rule-id')!, 'phone-country-code');
    scopeSelect.value = 'LodgingBusiness';
    setInput(
      q<HTMLTextAreaElement>(designer.root, 'rule-condition')!,
      'extractCountryCode(LodgingBusiness.address.PostalAddress.telephone) != getCountryCodeByCountry(LodgingBusiness.address.PostalAddress.addressCountry)',
    );
    setInput(q<HTMLInputElement>(designer.root, 'rule-message')!, COUNTRY_MESSAGE);
    await click(designer.root, 'add-rule');
    expect(q(designer.root, 'add-rule-error')?.textContent).toBe('');

    expect(await designer.save()).toBe(true);
    const stored = await client.getRules('lodging');
    expect(stored.rules).toHaveLength(1);
    expect(stored.rules[0].message).toBe(COUNTRY_MESSAGE);
    expect(stored.rules[0].severity).toBe('Error');
  });

  test('unknown function reported inline by the server check', async () => {
    const designer = new RuleDesigner(client);
    document.body.append(designer.root);
    await designer.loadDomain('lodging');
    designer.addRule({
      id: 'bogus', scope: 'LodgingBusiness',
      condition: 'frobnicate(LodgingBusiness.name) == "x"',
      message: 'm', severity: 'Error',
    });
    expect(await designer.save()).toBe(false);
    const diagnostics = q(designer.root, 'rule-diagnostics');
    expect(diagnostics?.textContent).toContain('UnknownFunction');
    expect(diagnostics?.textContent).toContain('frobnicate');
  });

  test('empty message blocked client-side before any request', async () => {
    const designer = new RuleDesigner(client);
    document.body.append(designer.root);
    await designer.loadDomain('lodging');
    setInput(q<HTMLInputElement>(designer.root, 'rule-id')!, 'r2');
    setInput(q<HTMLTextAreaElement>(designer.root, 'rule-condition')!, 'true');
    setInput(q<HTMLInputElement>(designer.root, 'rule-message')!, '');
    await click(designer.root, 'add-rule');
    expect(q(designer.root, 'add-rule-error')?.textContent).toContain('message');
  });
});

describe('validation console walkthrough', () => {
  const listing = () =>
    JSON.parse(readFileSync(path.join(FIXTURES, 'moosleite.jsonld'), 'utf-8'));

  async function runValidation(console_: ValidationConsole, doc: unknown) {
    setInput(console_.annotationInput, JSON.stringify(doc, null, 2), 'input');
    const previous = q(console_.root, 'verdict');
    await click(console_.root, 'run-validation');
    await waitFor(() => {
      const verdict = q(console_.root, 'verdict');
      return verdict && verdict !== previous ? verdict : null;
    });
    return console_.report!;
  }

  test('missing currency, country mismatch, then valid', async () => {
    const console_ = new ValidationConsole(client);
    document.body.append(console_.root);
    await console_.refreshDomains();
    console_.domainSelect.value = 'lodging';
    console_.rulesToggle.checked = true;

    // stage 1: as published
    const first = await runValidation(console_, listing());
    expect(first.verdict).toBe('Incomplete');
    const row = await waitFor(() =>
      q(console_.root, 'completeness-/currenciesAccepted'));
    expect(row.textContent).toContain('MissingRequiredProperty');
    expect(q(console_.root, 'verdict')?.textContent).toBe('Incomplete');

    // stage 2: add the missing required property
    const withCurrency = { ...listing(), currenciesAccepted: 'EUR' };
    const second = await runValidation(console_, withCurrency);
    expect(second.verdict).toBe('Inconsistent');
    const ruleRow = await waitFor(() => q(console_.root, 'rule-phone-country-code'));
    expect(ruleRow.textContent).toContain(COUNTRY_MESSAGE);
    expect(ruleRow.querySelector('.badge-error')).not.toBeNull();

    // stage 3: correct the phone's country code
    const fixed = { ...listing(), currenciesAccepted: 'EUR' };
    fixed.address = { ...fixed.address, telephone: '+43 5285 62894' };
    const third = await runValidation(console_, fixed);
    expect(third.verdict).toBe('Valid');
    expect(third.completeness).toHaveLength(0);
    expect(third.rules).toHaveLength(0);
    const verdict = q(console_.root, 'verdict');
    expect(verdict?.classList.contains('verdict-valid')).toBe(true);
  });

  test('extracting a page offers its blocks', async () => {
    const console_ = new ValidationConsole(client);
    document.body.append(console_.root);
    const page = `<script type="application/ld+json">${JSON.stringify(listing())}</script>`;
    await console_.extractFromHtml(page);
    await click(console_.root, 'use-block-0');
    expect(console_.annotationInput.value).toContain('"LodgingBusiness"');
  });
});

describe('domain editor flow', () => {
  test('rebuilds the lodging domain through the UI and saves with zero issues', async () => {
    const editor = new DomainEditor(client);
    document.body.append(editor.root);

    setInput(q<HTMLInputElement>(editor.root, 'domain-id')!, 'lodging-ui');
    setInput(q<HTMLInputElement>(editor.root, 'domain-name')!, 'Lodging (UI-built)');

    setInput(q<HTMLInputElement>(editor.root, 'class-search')!, 'LodgingBusiness', 'input');
    await click(editor.root, 'add-class-LodgingBusiness');

    for (const prop of ['name', 'address', 'currenciesAccepted', 'url', 'description', 'geo']) {
      await click(editor.root, `toggle-LodgingBusiness-${prop}`);
    }
    for (const prop of ['name', 'address', 'currenciesAccepted']) {
      await click(editor.root, `required-LodgingBusiness-${prop}`);
    }
    await click(editor.root, 'multiple-LodgingBusiness-url');

    // narrow the nested complex types into restricted classes
    await click(editor.root, 'restrict-LodgingBusiness-address-PostalAddress');
    for (const prop of ['postalCode', 'streetAddress', 'addressCountry',
                        'telephone', 'email', 'faxNumber', 'url']) {
      await click(editor.root, `toggle-PostalAddressRestricted-${prop}`);
    }
    for (const prop of ['postalCode', 'streetAddress', 'addressCountry']) {
      await click(editor.root, `required-PostalAddressRestricted-${prop}`);
    }

    await click(editor.root, 'expand-LodgingBusiness');
    await click(editor.root, 'restrict-LodgingBusiness-geo-GeoCoordinates');
    for (const prop of ['latitude', 'longitude']) {
      await click(editor.root, `toggle-GeoCoordinatesRestricted-${prop}`);
      await click(editor.root, `required-GeoCoordinatesRestricted-${prop}`);
    }

    expect(await editor.save()).toBe(true);

    // the server accepted it with zero issues; it must judge the use-case
    // annotation exactly like the shipped fixture does
    const listing = readFileSync(path.join(FIXTURES, 'moosleite.jsonld'), 'utf-8');
    const viaUi = await client.validate('lodging-ui', listing);
    const viaFixture = await client.validate('lodging', listing);
    expect(viaUi.verdict).toBe(viaFixture.verdict);
    expect(viaUi.completeness).toEqual(viaFixture.completeness);
    expect(viaUi.verdict).toBe('Incomplete');
  }, 30000);

  test('stale-draft defect surfaces as an inline server issue', async () => {
    const editor = new DomainEditor(client);
    document.body.append(editor.root);
    await editor.loadFromServer('lodging');
    // a stale draft references a property the base class does not carry
    editor.draft.doc.classes.LodgingBusiness.properties.ingredients = {
      required: false, multiple: false, expected: ['Text'],
    };
    expect(await editor.save()).toBe(false);
    const issue = await waitFor(() =>
      editor.root.querySelector('[data-testid="prop-LodgingBusiness-ingredients"] .issue'));
    expect(issue.textContent).toContain('PropertyNotOnClass');
  });

  test('warns once when the server copy moved underneath the draft', async () => {
    const editor = new DomainEditor(client);
    document.body.append(editor.root);
    await editor.loadFromServer('lodging');
    editor.draft.doc.name = 'renamed from the editor';
    editor.draft.dirty = true;

    const behindBack = await client.getDomain('lodging');
    behindBack.version = '1.0.1';
    await client.saveDomain(behindBack);

    expect(await editor.save()).toBe(false); // staleness warning first
    expect(editor.root.textContent).toContain('server copy changed');
    expect(await editor.save()).toBe(true); // explicit second save overwrites
    const final = await client.getDomain('lodging');
    expect(final.name).toBe('renamed from the editor');
  });
});
