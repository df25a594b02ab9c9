import { ApiClient } from './api.js';
import { ChatScreen } from './chat.js';
import { DashboardScreen } from './dashboard.js';

const API_BASE = (window as any).TUTOR_API_BASE ?? 'http://127.0.0.1:8000';
const TOKEN_KEY = 'tutor.token';

/**
 * Single-page shell: login form, then tabs for chat and dashboard.
 * A 401 from any call clears the stored token and returns to login.
 */
export class App {
  private api: ApiClient;
  private chat: ChatScreen | null = null;

  constructor(private root: HTMLElement) {
    this.api = new ApiClient(API_BASE, localStorage.getItem(TOKEN_KEY), () => {
      localStorage.removeItem(TOKEN_KEY);
      this.showLogin();
    });
  }

  start(): void {
    if (localStorage.getItem(TOKEN_KEY)) {
      this.showMain();
    } else {
      this.showLogin();
    }
  }

  showLogin(): void {
    this.root.innerHTML = `
      <form class="login">
        <label>Email <input type="email" name="email" required /></label>
        <button type="submit">Sign in</button>
        <p class="login-error" hidden></p>
      </form>`;
    const form = this.root.querySelector('form.login') as HTMLFormElement;
    form.addEventListener('submit', async (event) => {
      event.preventDefault();
      const email = (form.elements.namedItem('email') as HTMLInputElement).value;
      try {
        const { token } = await this.api.login(email);
        localStorage.setItem(TOKEN_KEY, token);
        this.showMain();
      } catch {
        const error = form.querySelector('.login-error') as HTMLElement;
        error.hidden = false;
        error.textContent = 'Sign-in failed — check the email address.';
      }
    });
  }

  showMain(): void {
    this.root.innerHTML = `
      <nav class="tabs">
        <button data-tab="chat">Chat</button>
        <button data-tab="dashboard">Dashboard</button>
        <button class="logout">Sign out</button>
      </nav>
      <main class="screen"></main>`;
    const screen = this.root.querySelector('main.screen') as HTMLElement;
    this.root.querySelector('[data-tab="chat"]')!.addEventListener('click', () => {
      void this.openChat(screen);
    });
    this.root.querySelector('[data-tab="dashboard"]')!.addEventListener('click', () => {
      void new DashboardScreen(screen, this.api).load();
    });
    this.root.querySelector('.logout')!.addEventListener('click', () => {
      localStorage.removeItem(TOKEN_KEY);
      this.showLogin();
    });
    void this.openChat(screen);
  }

  private async openChat(screen: HTMLElement): Promise<void> {
    const sessionId = await this.api.createSession();
    this.chat = new ChatScreen(screen, this.api, sessionId);
  }
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  new App(document.getElementById('app')!).start();
}
