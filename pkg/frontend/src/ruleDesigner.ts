// Rule Designer: scope from the domain's restricted classes, condition as
// text with server-side diagnostics, mandatory message and severity.

import { ApiRequestError, SdovalClient } from './api.js';
import { clear, el } from './dom.js';
import type { RuleDoc, RuleSetDoc, Severity } from './types.js';

export class RuleDesigner {
  readonly root: HTMLElement;
  ruleSet: RuleSetDoc | null = null;
  private scopes: string[] = [];
  private banner = el('div', { class: 'banner hidden' });
  private listBox = el('div', { class: 'rule-list' });
  private diagnostics = el('p', { class: 'issue', 'data-testid': 'rule-diagnostics' });

  constructor(private client: SdovalClient) {
    this.root = el('section', { class: 'rule-designer' });
    this.render();
  }

  async loadDomain(domainId: string): Promise<void> {
    const spec = await this.client.getDomain(domainId);
    this.scopes = Object.keys(spec.classes);
    try {
      this.ruleSet = await this.client.getRules(domainId);
    } catch (error) {
      if (error instanceof ApiRequestError && error.status === 404) {
        this.ruleSet = { id: `${domainId}-rules`, domainId, rules: [] };
      } else {
        throw error;
      }
    }
    this.render();
  }

  addRule(rule: RuleDoc): string | null {
    if (!this.ruleSet) return 'load a domain first';
    if (!rule.message.trim()) return 'a rule needs a message';
    if (!rule.condition.trim()) return 'a rule needs a condition';
    if (!rule.id.trim()) return 'a rule needs an id';
    if (this.ruleSet.rules.some((r) => r.id === rule.id)) {
      return `rule id ${rule.id} already used`;
    }
    this.ruleSet.rules.push(rule);
    this.render();
    return null;
  }

  removeRule(id: string): void {
    if (!this.ruleSet) return;
    this.ruleSet.rules = this.ruleSet.rules.filter((r) => r.id !== id);
    this.render();
  }

  async save(): Promise<boolean> {
    if (!this.ruleSet) return false;
    this.diagnostics.textContent = '';
    try {
      this.ruleSet = await this.client.saveRules(this.ruleSet.domainId, this.ruleSet);
      this.banner.textContent = `Saved rule set ${this.ruleSet.id}.`;
      this.banner.classList.remove('hidden');
      this.render();
      return true;
    } catch (error) {
      if (error instanceof ApiRequestError) {
        this.diagnostics.textContent = `${error.body.code}: ${error.body.message}`;
      } else {
        this.diagnostics.textContent = `network failure: ${(error as Error).message}`;
      }
      return false;
    }
  }

  private render(): void {
    clear(this.root);
    this.root.append(el('h2', {}, 'Rule designer'), this.banner);
    if (!this.ruleSet) {
      this.root.append(el('p', {}, 'Load a domain to edit its rules.'));
      return;
    }

    clear(this.listBox);
    for (const rule of this.ruleSet.rules) {
      this.listBox.append(
        el('div', { class: 'rule', 'data-testid': `rule-${rule.id}` },
          el('code', {}, rule.condition),
          el('span', {}, ` → [${rule.severity}] ${rule.message} `),
          el('button', {
            onclick: () => this.removeRule(rule.id),
            'data-testid': `remove-rule-${rule.id}`,
          }, 'remove'),
        ),
      );
    }

    const idInput = el('input', { placeholder: 'rule id', 'data-testid': 'rule-id' });
    const scopeSelect = el('select', { 'data-testid': 'rule-scope' });
    for (const scope of this.scopes) {
      scopeSelect.append(el('option', { value: scope }, scope));
    }
    const conditionInput = el('textarea', {
      placeholder: 'condition, e.g. HotelRoom.floorSize.QuantitativeValue.value <= 0',
      'data-testid': 'rule-condition',
    });
    const messageInput = el('input', {
      placeholder: 'violation message shown to users',
      'data-testid': 'rule-message',
    });
    const severitySelect = el('select', { 'data-testid': 'rule-severity' });
    for (const severity of ['Error', 'Warning', 'Info']) {
      severitySelect.append(el('option', { value: severity }, severity));
    }
    const addError = el('p', { class: 'issue', 'data-testid': 'add-rule-error' });
    const addButton = el('button', {
      'data-testid': 'add-rule',
      onclick: () => {
        const problem = this.addRule({
          id: idInput.value.trim(),
          scope: scopeSelect.value,
          condition: conditionInput.value.trim(),
          message: messageInput.value.trim(),
          severity: severitySelect.value as Severity,
        });
        addError.textContent = problem ?? '';
      },
    }, 'add rule');
    const saveButton = el('button', {
      'data-testid': 'save-rules',
      onclick: () => void this.save(),
    }, 'save rule set');

    this.root.append(
      this.listBox,
      el('div', { class: 'rule-form' },
        idInput, scopeSelect, conditionInput, messageInput, severitySelect,
        addButton, addError),
      this.diagnostics,
      saveButton,
    );
  }
}
