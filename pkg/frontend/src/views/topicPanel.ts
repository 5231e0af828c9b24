/**
 * Model-detail panel: topic list with merge/split controls, and the
 * selected topic's words, documents, and add-words subpanel.
 *
 * Word rows offer remove and "raise above the word before it", which is
 * how a reorder gesture maps onto the swap refinement. Document rows
 * offer remove-from-topic and a full-text viewer. Everything queues into
 * the pending list; nothing changes the model until apply.
 */
import type { ModelStore } from '../state/model.js';
import type { TopicDetail } from '../api/types.js';
import { clear, el } from './dom.js';

export class TopicPanel {
  private splitWords = '';
  private freeWord = '';

  constructor(
    private readonly root: HTMLElement,
    private readonly store: ModelStore,
  ) {
    this.root.classList.add('topic-panel');
  }

  render(): void {
    const s = this.store.getState();
    clear(this.root);
    this.root.append(el('h3', { text: 'Model detail' }));

    const table = el('table', { className: 'topic-list' });
    const head = el('tr', {}, [
      el('th', { text: 'topic' }),
      el('th', { text: 'label' }),
      el('th', { text: 'weight' }),
      el('th', { text: 'top words' }),
      el('th', { text: '' }),
    ]);
    table.append(head);
    for (const topic of s.topics) {
      const words = topic.words
        .slice(0, 5)
        .map(([w]) => w)
        .join(', ');
      const row = el('tr', {
        className: topic.topic === s.selectedTopic ? 'topic-row selected' : 'topic-row',
        dataset: { topic: String(topic.topic) },
      });
      row.append(
        el('td', { text: String(topic.topic) }),
        el('td', { text: topic.label }),
        el('td', { text: topic.weight.toFixed(3) }),
        el('td', { text: words }),
        el('td', {}, [
          el('button', {
            className: 'view-topic',
            text: 'view',
            onClick: () => void this.store.selectTopic(topic.topic),
          }),
        ]),
      );
      table.append(row);
    }
    this.root.append(table);
    this.root.append(this.renderMergeSplit(s));

    if (s.detail) {
      this.root.append(this.renderDetail(s.detail, s.addPanelOpen));
    } else {
      this.root.append(
        el('p', { className: 'placeholder', text: 'pick a topic to see its words' }),
      );
    }

    if (s.viewedDoc) {
      this.root.append(
        el('div', { className: 'doc-viewer' }, [
          el('h4', { text: `Document ${s.viewedDoc.doc_id}` }),
          el('p', { className: 'doc-text', text: s.viewedDoc.text }),
          el('button', {
            className: 'close-doc',
            text: 'Close',
            onClick: () => this.store.viewDoc(null),
          }),
        ]),
      );
    }
  }

  private renderMergeSplit(s: ReturnType<ModelStore['getState']>): HTMLElement {
    const box = el('div', { className: 'merge-split' });
    const topics = s.topics.map((t) => t.topic);

    const keep = el('select', { className: 'merge-keep' });
    const absorb = el('select', { className: 'merge-absorb' });
    for (const select of [keep, absorb]) {
      for (const t of topics) {
        select.append(el('option', { text: `topic ${t}`, value: String(t) }));
      }
    }
    if (topics.length > 1) absorb.value = String(topics[1]);
    box.append(
      el('span', { text: 'merge ' }),
      absorb,
      el('span', { text: ' into ' }),
      keep,
      el('button', {
        className: 'queue-merge',
        text: 'queue',
        disabled: topics.length < 2,
        onClick: () =>
          void this.store.queue({
            type: 'merge_topics',
            keep: Number(keep.value),
            absorb: Number(absorb.value),
          }),
      }),
    );

    const splitTopic = el('select', { className: 'split-topic' });
    for (const t of topics) {
      splitTopic.append(el('option', { text: `topic ${t}`, value: String(t) }));
    }
    const seeds = el('input', {
      className: 'split-seeds',
      placeholder: 'seed words, space separated',
      value: this.splitWords,
    });
    seeds.addEventListener('input', () => {
      this.splitWords = seeds.value;
    });
    box.append(
      el('span', { text: ' split ' }),
      splitTopic,
      seeds,
      el('button', {
        className: 'queue-split',
        text: 'queue',
        onClick: () => {
          const words = this.splitWords.trim().split(/\s+/).filter(Boolean);
          if (words.length > 0) {
            void this.store.queue({
              type: 'split_topic',
              topic: Number(splitTopic.value),
              seed_words: words,
            });
          }
        },
      }),
    );
    return box;
  }

  private renderDetail(detail: TopicDetail, addPanelOpen: boolean): HTMLElement {
    const box = el('div', { className: 'topic-detail', dataset: { topic: String(detail.topic) } });
    box.append(
      el('h4', { text: `Topic ${detail.topic}: ${detail.label}` }),
      el('p', { className: 'topic-weight', text: `weight ${detail.weight.toFixed(3)}` }),
    );

    const words = el('table', { className: 'word-table' });
    words.append(
      el('tr', {}, [
        el('th', { text: 'word' }),
        el('th', { text: 'weight' }),
        el('th', { text: '' }),
      ]),
    );
    detail.words.forEach(([word, weight], i) => {
      const actions = el('td', {});
      if (i > 0) {
        const above = detail.words[i - 1][0];
        actions.append(
          el('button', {
            className: 'swap-up',
            text: 'raise',
            title: `raise ${word} above ${above}`,
            onClick: () =>
              void this.store.queue({
                type: 'swap_order',
                topic: detail.topic,
                higher: above,
                lower: word,
              }),
          }),
        );
      }
      actions.append(
        el('button', {
          className: 'remove-topic-word',
          text: 'remove',
          title: `remove ${word}`,
          onClick: () =>
            void this.store.queue({ type: 'remove_word', topic: detail.topic, word }),
        }),
      );
      words.append(
        el('tr', { className: 'word-row', dataset: { word } }, [
          el('td', { text: word }),
          el('td', { text: weight.toFixed(3) }),
          actions,
        ]),
      );
    });
    box.append(words);

    box.append(
      el('button', {
        className: 'open-add-panel',
        text: addPanelOpen ? 'Close add words' : 'Add words',
        onClick: () => this.store.toggleAddPanel(),
      }),
    );
    if (addPanelOpen) {
      box.append(this.renderAddPanel(detail));
    }

    const docs = el('div', { className: 'doc-list' }, [el('h4', { text: 'Top documents' })]);
    for (const doc of detail.docs) {
      docs.append(
        el('div', { className: 'doc-row', dataset: { doc: String(doc.doc) } }, [
          el('span', { className: 'doc-id', text: doc.doc_id }),
          el('span', { className: 'doc-weight', text: doc.weight.toFixed(3) }),
          el('button', {
            className: 'view-doc',
            text: 'view',
            onClick: () => this.store.viewDoc({ doc_id: doc.doc_id, text: doc.text }),
          }),
          el('button', {
            className: 'remove-doc',
            text: 'remove',
            title: `remove ${doc.doc_id} from topic ${detail.topic}`,
            onClick: () =>
              void this.store.queue({
                type: 'remove_doc',
                topic: detail.topic,
                doc: doc.doc,
              }),
          }),
        ]),
      );
    }
    box.append(docs);
    return box;
  }

  private renderAddPanel(detail: TopicDetail): HTMLElement {
    const panel = el('div', { className: 'add-panel' }, [el('h4', { text: 'Add words' })]);
    if (detail.suggestions.length === 0) {
      panel.append(
        el('p', { className: 'placeholder', text: 'no suggested words for this topic' }),
      );
    } else {
      const list = el('ul', { className: 'suggestion-list' });
      for (const sug of detail.suggestions) {
        list.append(
          el('li', { className: 'suggestion', dataset: { word: sug.word } }, [
            el('span', { text: `${sug.word} (${sug.score.toFixed(3)})` }),
            el('button', {
              className: 'add-suggested',
              text: '+',
              title: `add ${sug.word}`,
              onClick: () =>
                void this.store.queue({
                  type: 'add_word',
                  topic: detail.topic,
                  word: sug.word,
                }),
            }),
          ]),
        );
      }
      panel.append(list);
    }
    const input = el('input', {
      className: 'add-free-input',
      placeholder: 'any vocabulary word',
      value: this.freeWord,
    });
    input.addEventListener('input', () => {
      this.freeWord = input.value;
    });
    panel.append(
      input,
      el('button', {
        className: 'add-free-submit',
        text: 'add',
        onClick: () => {
          const word = this.freeWord.trim();
          if (word) {
            void this.store.queue({ type: 'add_word', topic: detail.topic, word });
            this.freeWord = '';
          }
        },
      }),
    );
    return panel;
  }
}
