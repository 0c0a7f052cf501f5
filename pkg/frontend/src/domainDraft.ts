// Working-copy model behind the domain editor. Pure data operations live
// here so they can be tested without a DOM.

import type {
  DomainIssue,
  DomainSpecDoc,
  ExpectedType,
  PropertyInfo,
} from './types.js';

export const DATATYPES = new Set([
  'Text', 'URL', 'Number', 'Integer', 'Float', 'Boolean', 'Date', 'DateTime', 'Time',
]);

export interface DomainDraft {
  doc: DomainSpecDoc;
  dirty: boolean;
  expandedClass: string | null;
  /** Serialization of the server copy at load time; drives staleness checks. */
  loadedFrom: string | null;
}

export function newDraft(id: string, name: string): DomainDraft {
  return {
    doc: { id, name, version: '1.0.0', targets: [], classes: {} },
    dirty: false,
    expandedClass: null,
    loadedFrom: null,
  };
}

export function draftFromServer(doc: DomainSpecDoc): DomainDraft {
  return {
    doc: JSON.parse(JSON.stringify(doc)) as DomainSpecDoc,
    dirty: false,
    expandedClass: doc.targets[0] ?? null,
    loadedFrom: JSON.stringify(doc),
  };
}

export function addRestrictedClass(
  draft: DomainDraft,
  localId: string,
  basedOn: string,
  asTarget: boolean,
): void {
  if (draft.doc.classes[localId]) {
    throw new Error(`class ${localId} already exists`);
  }
  draft.doc.classes[localId] = { basedOn, properties: {} };
  if (asTarget) draft.doc.targets.push(localId);
  draft.expandedClass = localId;
  draft.dirty = true;
}

export function removeRestrictedClass(draft: DomainDraft, localId: string): void {
  delete draft.doc.classes[localId];
  draft.doc.targets = draft.doc.targets.filter((t) => t !== localId);
  for (const cls of Object.values(draft.doc.classes)) {
    for (const constraint of Object.values(cls.properties)) {
      constraint.expected = constraint.expected.filter(
        (e) => typeof e === 'string' || !('ref' in e) || e.ref !== localId,
      );
    }
  }
  if (draft.expandedClass === localId) draft.expandedClass = null;
  draft.dirty = true;
}

/** Default expected types for a newly toggled-on property: its declared ranges. */
export function defaultExpected(info: PropertyInfo): ExpectedType[] {
  return info.ranges.map((range) =>
    DATATYPES.has(range) ? range : { class: range },
  );
}

export function toggleProperty(
  draft: DomainDraft,
  localId: string,
  info: PropertyInfo,
): void {
  const cls = draft.doc.classes[localId];
  if (!cls) throw new Error(`no class ${localId}`);
  if (info.name in cls.properties) {
    delete cls.properties[info.name];
  } else {
    cls.properties[info.name] = {
      required: false,
      multiple: false,
      expected: defaultExpected(info),
    };
  }
  draft.dirty = true;
}

export function setFlags(
  draft: DomainDraft,
  localId: string,
  property: string,
  flags: { required?: boolean; multiple?: boolean },
): void {
  const constraint = draft.doc.classes[localId]?.properties[property];
  if (!constraint) throw new Error(`no constraint ${localId}.${property}`);
  if (flags.required !== undefined) constraint.required = flags.required;
  if (flags.multiple !== undefined) constraint.multiple = flags.multiple;
  draft.dirty = true;
}

export function setExpected(
  draft: DomainDraft,
  localId: string,
  property: string,
  expected: ExpectedType[],
): void {
  const constraint = draft.doc.classes[localId]?.properties[property];
  if (!constraint) throw new Error(`no constraint ${localId}.${property}`);
  if (expected.length === 0) throw new Error('expected list must not be empty');
  constraint.expected = expected;
  draft.dirty = true;
}

/** Replace one class-valued expected entry with a reference to a restriction. */
export function referenceRestrictedClass(
  draft: DomainDraft,
  localId: string,
  property: string,
  className: string,
  refLocalId: string,
): void {
  const constraint = draft.doc.classes[localId]?.properties[property];
  if (!constraint) throw new Error(`no constraint ${localId}.${property}`);
  constraint.expected = constraint.expected.map((entry) =>
    typeof entry !== 'string' && 'class' in entry && entry.class === className
      ? { ref: refLocalId }
      : entry,
  );
  draft.dirty = true;
}

export function narrowSubclasses(
  draft: DomainDraft,
  localId: string,
  property: string,
  className: string,
  subclasses: string[] | null,
): void {
  const constraint = draft.doc.classes[localId]?.properties[property];
  if (!constraint) throw new Error(`no constraint ${localId}.${property}`);
  constraint.expected = constraint.expected.map((entry) => {
    if (typeof entry === 'string' || !('class' in entry) || entry.class !== className) {
      return entry;
    }
    return subclasses && subclasses.length > 0
      ? { class: entry.class, subclasses }
      : { class: entry.class };
  });
  draft.dirty = true;
}

/** Group server-side issues by "classes/<localId>/properties/<prop>" prefix. */
export function issuesByField(issues: DomainIssue[]): Map<string, DomainIssue[]> {
  const grouped = new Map<string, DomainIssue[]>();
  for (const issue of issues) {
    const match = issue.path.match(/^classes\/([^/]+)(?:\/properties\/([^/]+))?/);
    const key = match ? (match[2] ? `${match[1]}.${match[2]}` : match[1]) : '';
    const bucket = grouped.get(key) ?? [];
    bucket.push(issue);
    grouped.set(key, bucket);
  }
  return grouped;
}

const STORAGE_KEY = 'sdoval.domainDraft';

export function persistDraft(draft: DomainDraft, storage: Storage = localStorage): void {
  storage.setItem(STORAGE_KEY, JSON.stringify(draft));
}

export function restoreDraft(storage: Storage = localStorage): DomainDraft | null {
  const raw = storage.getItem(STORAGE_KEY);
  if (!raw) return null;
  try {
    return JSON.parse(raw) as DomainDraft;
  } catch {
    return null;
  }
}

export function discardDraft(storage: Storage = localStorage): void {
  storage.removeItem(STORAGE_KEY);
}
