// Wire types mirroring the validation service's JSON formats.

export interface ClassSummary {
  name: string;
  parents: string[];
}

export interface PropertyInfo {
  name: string;
  ranges: string[];
  inheritedFrom: string;
}

export interface ClassDetail {
  name: string;
  parents: string[];
  ancestors: string[];
  properties: PropertyInfo[];
}

export type ExpectedType =
  | string // primitive datatype, e.g. "Text"
  | { class: string; subclasses?: string[] }
  | { ref: string };

export interface PropertyConstraintDoc {
  required: boolean;
  multiple: boolean;
  expected: ExpectedType[];
}

export interface RestrictedClassDoc {
  basedOn: string;
  properties: Record<string, PropertyConstraintDoc>;
}

export interface DomainSpecDoc {
  id: string;
  name: string;
  version: string;
  targets: string[];
  classes: Record<string, RestrictedClassDoc>;
}

export interface DomainSummary {
  id: string;
  name: string;
  version: string;
  targets: string[];
  hasRules: boolean;
}

export type Severity = 'Error' | 'Warning' | 'Info';

export interface RuleDoc {
  id: string;
  scope: string;
  condition: string;
  message: string;
  severity: Severity;
}

export interface RuleSetDoc {
  id: string;
  domainId: string;
  rules: RuleDoc[];
}

export interface DomainIssue {
  code: string;
  path: string;
  message: string;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  details?: unknown;
}

export interface SyntaxViolationDoc {
  code: string;
  message: string;
  path: string;
  line?: number;
  column?: number;
}

export interface CompletenessViolationDoc {
  code: string;
  severity: string;
  path: string;
  expected: string;
  found: string;
}

export interface RuleViolationDoc {
  ruleId: string;
  severity: string;
  message: string;
  bindings: Record<string, string>;
  nodePath: string;
}

export interface ValidationReportDoc {
  source: string;
  domainId: string;
  ruleSetId?: string;
  verdict: 'Invalid-Syntax' | 'Incomplete' | 'Inconsistent' | 'Valid';
  syntax?: SyntaxViolationDoc;
  completeness: CompletenessViolationDoc[];
  rules: RuleViolationDoc[];
  diagnostics: string[];
}

export interface ExtractedBlockDoc {
  index: number;
  parsed?: unknown;
  error?: SyntaxViolationDoc;
}
