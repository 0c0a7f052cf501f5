// Domain Definition Interface: pick a base class, toggle properties with
// required/multiple flags, restrict complex-valued properties to nested
// restricted classes or subclass subsets, save to the server.

import { ApiRequestError, SdovalClient } from './api.js';
import { clear, el } from './dom.js';
import {
  DATATYPES,
  DomainDraft,
  addRestrictedClass,
  draftFromServer,
  issuesByField,
  narrowSubclasses,
  newDraft,
  persistDraft,
  referenceRestrictedClass,
  restoreDraft,
  setFlags,
  toggleProperty,
} from './domainDraft.js';
import type { ClassSummary, DomainIssue, PropertyInfo } from './types.js';

export class DomainEditor {
  readonly root: HTMLElement;
  draft: DomainDraft;
  private issues: DomainIssue[] = [];
  private banner = el('div', { class: 'banner hidden' });
  private classesBox = el('div', { class: 'classes' });
  private detailCache = new Map<string, PropertyInfo[]>();
  private hierarchy: ClassSummary[] | null = null;
  private staleWarned = false;

  constructor(
    private client: SdovalClient,
    private storage: Storage = localStorage,
  ) {
    this.draft = restoreDraft(this.storage) ?? newDraft('my-domain', 'My domain');
    this.root = el('section', { class: 'domain-editor' });
    this.render();
  }

  // -- data helpers -------------------------------------------------------

  private async propertiesOf(className: string): Promise<PropertyInfo[]> {
    const cached = this.detailCache.get(className);
    if (cached) return cached;
    const detail = await this.client.classDetail(className);
    this.detailCache.set(className, detail.properties);
    return detail.properties;
  }

  /** Strict descendants of a class, computed from the full class listing. */
  private async subclassesOf(className: string): Promise<string[]> {
    if (!this.hierarchy) this.hierarchy = await this.client.searchClasses('');
    const children = new Map<string, string[]>();
    for (const cls of this.hierarchy) {
      for (const parent of cls.parents) {
        const bucket = children.get(parent) ?? [];
        bucket.push(cls.name);
        children.set(parent, bucket);
      }
    }
    const out: string[] = [];
    const work = [...(children.get(className) ?? [])];
    while (work.length > 0) {
      const current = work.pop() as string;
      if (!out.includes(current)) {
        out.push(current);
        work.push(...(children.get(current) ?? []));
      }
    }
    return out.sort();
  }

  private mutate(fn: () => void): void {
    fn();
    persistDraft(this.draft, this.storage);
    this.render();
  }

  async loadFromServer(id: string): Promise<void> {
    this.draft = draftFromServer(await this.client.getDomain(id));
    persistDraft(this.draft, this.storage);
    this.issues = [];
    this.render();
  }

  async save(): Promise<boolean> {
    if (!this.staleWarned && this.draft.loadedFrom !== null) {
      try {
        const current = await this.client.getDomain(this.draft.doc.id);
        if (JSON.stringify(current) !== this.draft.loadedFrom) {
          this.staleWarned = true;
          this.showBanner(
            'The server copy changed since you loaded this domain; saving again overwrites it.',
          );
          return false;
        }
      } catch {
        // not stored yet; nothing to be stale against
      }
    }
    try {
      const saved = await this.client.saveDomain(this.draft.doc);
      this.draft = draftFromServer(saved);
      this.issues = [];
      this.staleWarned = false;
      persistDraft(this.draft, this.storage);
      this.showBanner(`Saved domain ${saved.id}.`);
      this.render();
      return true;
    } catch (error) {
      if (error instanceof ApiRequestError && error.body.code === 'DomainIssues') {
        this.issues = (error.body.details as DomainIssue[]) ?? [];
      } else if (error instanceof ApiRequestError) {
        this.showBanner(`Save rejected: ${error.body.message}`);
      } else {
        this.showBanner(`Network failure: ${(error as Error).message}`);
      }
      this.render();
      return false;
    }
  }

  private showBanner(message: string): void {
    this.banner.textContent = message;
    this.banner.classList.remove('hidden');
  }

  // -- rendering ------------------------------------------------------------

  private render(): void {
    clear(this.root);
    const doc = this.draft.doc;
    const grouped = issuesByField(this.issues);

    const idInput = el('input', { value: doc.id, 'data-testid': 'domain-id' });
    idInput.value = doc.id;
    idInput.addEventListener('change', () =>
      this.mutate(() => {
        this.draft.doc.id = idInput.value;
        this.draft.dirty = true;
      }),
    );
    const nameInput = el('input', { value: doc.name, 'data-testid': 'domain-name' });
    nameInput.value = doc.name;
    nameInput.addEventListener('change', () =>
      this.mutate(() => {
        this.draft.doc.name = nameInput.value;
        this.draft.dirty = true;
      }),
    );

    const search = el('input', {
      placeholder: 'search vocabulary classes',
      'data-testid': 'class-search',
    });
    const results = el('ul', { class: 'search-results' });
    search.addEventListener('input', async () => {
      clear(results);
      if (search.value.length < 2) return;
      for (const cls of await this.client.searchClasses(search.value)) {
        results.append(
          el(
            'li',
            {},
            el('button', {
              onclick: () =>
                this.mutate(() =>
                  addRestrictedClass(
                    this.draft,
                    cls.name,
                    cls.name,
                    this.draft.doc.targets.length === 0,
                  ),
                ),
              'data-testid': `add-class-${cls.name}`,
            }),
            ` ${cls.name} (${cls.parents.join(', ') || 'root'})`,
          ),
        );
      }
    });

    clear(this.classesBox);
    for (const [localId, cls] of Object.entries(doc.classes)) {
      this.classesBox.append(this.renderClass(localId, cls.basedOn, grouped));
    }

    const saveButton = el('button', {
      'data-testid': 'save-domain',
      onclick: () => void this.save(),
    });
    saveButton.textContent = this.draft.dirty ? 'Save (unsaved changes)' : 'Save';

    this.root.append(
      el('h2', {}, 'Domain definition'),
      this.banner,
      el('div', { class: 'meta' }, el('label', {}, 'id '), idInput,
        el('label', {}, ' name '), nameInput),
      el('div', { class: 'picker' }, search, results),
      this.classesBox,
      saveButton,
    );
  }

  private renderClass(
    localId: string,
    basedOn: string,
    grouped: Map<string, DomainIssue[]>,
  ): HTMLElement {
    const header = el('h3', {}, `${localId} — based on ${basedOn}`);
    const body = el('div', { class: 'class-body' });
    const box = el('div', { class: 'restricted-class', 'data-testid': `class-${localId}` },
      header, body);
    for (const issue of grouped.get(localId) ?? []) {
      body.append(el('p', { class: 'issue' }, `${issue.code}: ${issue.message}`));
    }
    if (this.draft.expandedClass !== localId) {
      header.append(' ');
      header.append(
        el('button', {
          onclick: () => this.mutate(() => (this.draft.expandedClass = localId)),
          'data-testid': `expand-${localId}`,
        }, 'edit'),
      );
      return box;
    }
    void this.propertiesOf(basedOn).then((properties) => {
      clear(body);
      for (const issue of grouped.get(localId) ?? []) {
        body.append(el('p', { class: 'issue' }, `${issue.code}: ${issue.message}`));
      }
      for (const info of properties) {
        body.append(this.renderProperty(localId, info, grouped));
      }
      const known = new Set(properties.map((p) => p.name));
      for (const prop of Object.keys(this.draft.doc.classes[localId].properties)) {
        if (known.has(prop)) continue;
        const row = el('div', { class: 'property', 'data-testid': `prop-${localId}-${prop}` },
          el('span', { class: 'prop-name' }, `${prop} — not a property of ${basedOn}`));
        for (const issue of grouped.get(`${localId}.${prop}`) ?? []) {
          row.append(el('p', { class: 'issue' }, `${issue.code}: ${issue.message}`));
        }
        body.append(row);
      }
    }).catch((error: Error) => this.showBanner(error.message));
    return box;
  }

  private renderProperty(
    localId: string,
    info: PropertyInfo,
    grouped: Map<string, DomainIssue[]>,
  ): HTMLElement {
    const constraint = this.draft.doc.classes[localId].properties[info.name];
    const row = el('div', { class: 'property', 'data-testid': `prop-${localId}-${info.name}` });
    const toggle = el('input', { type: 'checkbox', 'data-testid': `toggle-${localId}-${info.name}` });
    toggle.checked = constraint !== undefined;
    toggle.addEventListener('change', () =>
      this.mutate(() => toggleProperty(this.draft, localId, info)),
    );
    row.append(
      toggle,
      el('span', { class: 'prop-name' }, ` ${info.name} `),
      el('span', { class: 'ranges' }, `(${info.ranges.join(' | ')})`),
    );
    for (const issue of grouped.get(`${localId}.${info.name}`) ?? []) {
      row.append(el('p', { class: 'issue' }, `${issue.code}: ${issue.message}`));
    }
    if (!constraint) return row;

    const required = el('input', { type: 'checkbox', 'data-testid': `required-${localId}-${info.name}` });
    required.checked = constraint.required;
    required.addEventListener('change', () =>
      this.mutate(() => setFlags(this.draft, localId, info.name, { required: required.checked })),
    );
    const multiple = el('input', { type: 'checkbox', 'data-testid': `multiple-${localId}-${info.name}` });
    multiple.checked = constraint.multiple;
    multiple.addEventListener('change', () =>
      this.mutate(() => setFlags(this.draft, localId, info.name, { multiple: multiple.checked })),
    );
    row.append(
      el('label', {}, ' required '), required,
      el('label', {}, ' multiple '), multiple,
    );

    for (const range of info.ranges) {
      if (DATATYPES.has(range)) continue;
      row.append(this.renderComplexRange(localId, info.name, range));
    }
    return row;
  }

  private renderComplexRange(localId: string, property: string, range: string): HTMLElement {
    const constraint = this.draft.doc.classes[localId].properties[property];
    const entry = constraint.expected.find(
      (e): e is { class: string; subclasses?: string[] } =>
        typeof e !== 'string' && 'class' in e && e.class === range,
    );
    const refEntry = constraint.expected.find(
      (e): e is { ref: string } =>
        typeof e !== 'string' &&
        'ref' in e &&
        this.draft.doc.classes[e.ref]?.basedOn === range,
    );
    const box = el('span', { class: 'complex-range' });
    if (refEntry) {
      box.append(` ${range} → restricted ${refEntry.ref} `);
      return box;
    }
    if (!entry) return box;

    const restrict = el('button', {
      'data-testid': `restrict-${localId}-${property}-${range}`,
      onclick: () =>
        this.mutate(() => {
          const refId = `${range}Restricted`;
          if (!this.draft.doc.classes[refId]) {
            addRestrictedClass(this.draft, refId, range, false);
          }
          referenceRestrictedClass(this.draft, localId, property, range, refId);
        }),
    }, `restrict ${range}`);
    const narrowed = 'subclasses' in entry && entry.subclasses ? entry.subclasses : [];
    const subBox = el('span', { class: 'subclass-picker hidden' });
    const narrow = el('button', {
      'data-testid': `narrow-${localId}-${property}-${range}`,
      onclick: () =>
        void this.subclassesOf(range).then((subs) => {
          clear(subBox);
          subBox.classList.remove('hidden');
          for (const sub of subs) {
            const check = el('input', {
              type: 'checkbox',
              'data-testid': `subclass-${localId}-${property}-${sub}`,
            });
            check.checked = narrowed.includes(sub);
            check.addEventListener('change', () => {
              const now = 'subclasses' in entry && entry.subclasses ? entry.subclasses : [];
              const next = check.checked
                ? [...now, sub]
                : now.filter((s: string) => s !== sub);
              this.mutate(() =>
                narrowSubclasses(this.draft, localId, property, range,
                  next.length > 0 ? next : null),
              );
            });
            subBox.append(el('label', {}, ` ${sub} `), check);
          }
        }),
    }, narrowed.length > 0 ? `narrowed to ${narrowed.join(', ')}` : `narrow ${range}`);
    box.append(' ', restrict, ' ', narrow, ' ', subBox);
    return box;
  }
}
