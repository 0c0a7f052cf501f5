import { SdovalClient } from './api.js';
import { ValidationConsole } from './console.js';
import { clear, el } from './dom.js';
import { DomainEditor } from './domainEditor.js';
import { RuleDesigner } from './ruleDesigner.js';

declare global {
  interface Window {
    SDOVAL_API?: string;
  }
}

export function mountApp(root: HTMLElement, baseUrl?: string): {
  editor: DomainEditor;
  designer: RuleDesigner;
  console: ValidationConsole;
} {
  const client = new SdovalClient(baseUrl ?? window.SDOVAL_API ?? '');
  const editor = new DomainEditor(client);
  const designer = new RuleDesigner(client);
  const console_ = new ValidationConsole(client);

  const panes: Record<string, HTMLElement> = {
    Validate: console_.root,
    'Domain editor': editor.root,
    'Rule designer': designer.root,
  };
  const body = el('main', {});
  const tabs = el('nav', { class: 'tabs' });
  for (const label of Object.keys(panes)) {
    tabs.append(
      el('button', {
        'data-testid': `tab-${label.split(' ')[0].toLowerCase()}`,
        onclick: () => {
          clear(body);
          body.append(panes[label]);
        },
      }, label),
    );
  }
  body.append(panes.Validate);

  clear(root);
  root.append(el('h1', {}, 'schema.org domain validator'), tabs, body);
  void console_.refreshDomains().catch(() => undefined);
  return { editor, designer, console: console_ };
}
