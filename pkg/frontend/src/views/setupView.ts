/**
 * Setup window: corpus upload, hyperparameters, and per-topic concept
 * word curation driven by query expansion.
 *
 * Candidates from the expanded query carry a "+" that moves them into the
 * target topic's final list; entries there carry a "-" that removes them.
 * Free-text words can join a list the same way. "Apply" creates the model
 * and trains it; "View" hands the tree over to the model window.
 */
import type { SetupStore } from '../state/setup.js';
import { clear, el } from './dom.js';

export class SetupView {
  private corpusText = '';
  private freeWord = '';

  constructor(
    private readonly root: HTMLElement,
    private readonly store: SetupStore,
    private readonly onView: (treeId: string) => void,
  ) {
    this.root.classList.add('setup-window');
    store.subscribe(() => this.render());
    this.render();
  }

  render(): void {
    const s = this.store.getState();
    clear(this.root);

    const corpusBox = el('section', { className: 'panel corpus-box' }, [
      el('h3', { text: 'Corpus' }),
    ]);
    const textarea = el('textarea', {
      className: 'corpus-input',
      placeholder: 'one JSON record per line: {"id": ..., "text": ..., "category": ...}',
    });
    textarea.value = this.corpusText;
    textarea.addEventListener('input', () => {
      this.corpusText = textarea.value;
    });
    corpusBox.append(
      textarea,
      el('button', {
        className: 'upload-corpus',
        text: 'Upload corpus',
        onClick: () => void this.store.uploadCorpus(this.corpusText),
      }),
    );
    if (s.corpus) {
      corpusBox.append(
        el('p', {
          className: 'corpus-summary',
          text: `${s.corpus.corpus_id}: ${s.corpus.n_docs} documents, ${s.corpus.n_terms} terms`,
        }),
      );
    }

    const hyperBox = el('section', { className: 'panel hyper-box' }, [
      el('h3', { text: 'Model settings' }),
    ]);
    hyperBox.append(
      this.numberField('initial topics', 'k-init', s.kInit, (v) =>
        this.store.setHyper({ kInit: v }),
      ),
      this.numberField('training sweeps', 'train-iters', s.trainIters, (v) =>
        this.store.setHyper({ trainIters: v }),
      ),
      this.numberField('seed', 'seed', s.seed, (v) => this.store.setHyper({ seed: v })),
    );

    const conceptBox = el('section', { className: 'panel concept-box' }, [
      el('h3', { text: 'Concept words' }),
    ]);
    const queryRow = el('div', { className: 'query-row' });
    const queryInput = el('input', {
      className: 'query-input',
      placeholder: 'query phrase, e.g. "climate policy"',
      value: s.query,
    });
    queryInput.addEventListener('input', () => this.store.setQuery(queryInput.value));
    queryRow.append(
      queryInput,
      el('button', {
        className: 'expand-query',
        text: 'Expand',
        onClick: () => void this.store.expand(),
      }),
    );
    conceptBox.append(queryRow);

    const targetRow = el('div', { className: 'target-row' }, [
      el('span', { text: 'add to: ' }),
    ]);
    const targetSelect = el('select', { className: 'target-topic' });
    s.conceptLists.forEach((_, i) => {
      const opt = el('option', { text: `topic ${i}`, value: String(i) });
      if (i === s.targetTopic) opt.selected = true;
      targetSelect.append(opt);
    });
    targetSelect.addEventListener('change', () =>
      this.store.setTargetTopic(Number(targetSelect.value)),
    );
    targetRow.append(
      targetSelect,
      el('button', {
        className: 'add-topic-list',
        text: 'New topic list',
        onClick: () => this.store.addConceptList(),
      }),
    );
    conceptBox.append(targetRow);

    const candidates = el('ul', { className: 'candidates' });
    for (const word of s.candidates) {
      candidates.append(
        el('li', { className: 'candidate', dataset: { word } }, [
          el('span', { text: word }),
          el('button', {
            className: 'add-candidate',
            text: '+',
            title: `add ${word}`,
            onClick: () => this.store.addWord(word),
          }),
        ]),
      );
    }
    conceptBox.append(candidates);

    const freeRow = el('div', { className: 'free-row' });
    const freeInput = el('input', {
      className: 'free-word',
      placeholder: 'other word',
      value: this.freeWord,
    });
    freeInput.addEventListener('input', () => {
      this.freeWord = freeInput.value;
    });
    freeRow.append(
      freeInput,
      el('button', {
        className: 'add-free-word',
        text: '+',
        onClick: () => {
          this.store.addWord(this.freeWord);
          this.freeWord = '';
        },
      }),
    );
    conceptBox.append(freeRow);

    const finals = el('div', { className: 'final-lists' });
    s.conceptLists.forEach((words, i) => {
      const list = el('ul', { className: 'final-list', dataset: { topic: String(i) } });
      for (const word of words) {
        list.append(
          el('li', { className: 'final-word', dataset: { word } }, [
            el('span', { text: word }),
            el('button', {
              className: 'remove-word',
              text: '-',
              title: `remove ${word}`,
              onClick: () => this.store.removeWord(i, word),
            }),
          ]),
        );
      }
      finals.append(
        el('div', { className: 'final-topic' }, [
          el('h4', { text: `Topic ${i} final concept words` }),
          words.length ? list : el('p', { className: 'placeholder', text: '(empty)' }),
        ]),
      );
    });
    conceptBox.append(finals);

    const actions = el('section', { className: 'panel actions' });
    actions.append(
      el('button', {
        className: 'apply-model',
        text: 'Apply',
        disabled: s.phase === 'creating' || s.phase === 'training',
        onClick: () => void this.store.apply(),
      }),
      el('button', {
        className: 'view-model',
        text: 'View',
        disabled: s.phase !== 'ready' || !s.created,
        onClick: () => {
          if (s.created) this.onView(s.created.tree_id);
        },
      }),
    );
    if (s.phase === 'training') {
      const done = s.job?.done_iters ?? 0;
      const total = s.job?.total_iters ?? s.trainIters;
      actions.append(
        el('p', { className: 'job-banner', text: `training: ${done}/${total} sweeps` }),
      );
    }
    if (s.phase === 'ready' && s.created) {
      actions.append(
        el('p', {
          className: 'ready-note',
          text: `model ${s.created.tree_id} ready (node ${s.trainedNode})`,
        }),
      );
    }
    for (const warning of s.warnings) {
      actions.append(el('p', { className: 'warning', text: warning }));
    }
    if (s.error) {
      actions.append(el('p', { className: 'error', text: s.error }));
    }

    this.root.append(corpusBox, hyperBox, conceptBox, actions);
  }

  private numberField(
    label: string,
    cls: string,
    value: number,
    onChange: (v: number) => void,
  ): HTMLElement {
    const input = el('input', { className: cls, type: 'number', value: String(value) });
    input.addEventListener('change', () => {
      const v = Number(input.value);
      if (Number.isFinite(v)) onChange(v);
    });
    return el('label', { className: 'field' }, [el('span', { text: label }), input]);
  }
}
