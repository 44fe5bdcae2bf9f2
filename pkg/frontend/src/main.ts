import { PlayClient } from './api.js';
import { App, collectRefs } from './ui.js';

const params = new URLSearchParams(window.location.search);
const base = params.get('api') ?? 'http://127.0.0.1:8080';

const app = new App(new PlayClient(base), collectRefs(document));
app.bind();
