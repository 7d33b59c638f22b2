#pragma once

// Locale template packs. Keys are "<game>.<name>"; placeholders are literal
// substrings ("$N$", "<REASON>") replaced verbatim by render(). A locale
// without a key falls back to English. Packs can be overridden from a JSON
// file of the form {"de": {"dond.goal.cooperative": "..."}}.

#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "negobench/error.hpp"
#include "negobench/record.hpp"

namespace negobench {

using Substitutions = std::vector<std::pair<std::string, std::string>>;

inline std::string replace_all(std::string text, const std::string& from, const std::string& to) {
  if (from.empty()) return text;
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

// Substitutions are applied in order, each over the whole text, so a
// substituted value is never re-scanned by the same placeholder.
inline std::string render(std::string text, const Substitutions& subs) {
  for (const auto& [key, value] : subs) text = replace_all(std::move(text), key, value);
  return text;
}

namespace detail {

using Pack = std::map<std::string, std::string>;

inline const char* kDondInitialEn =
    "You are playing a negotiation game in which you have to agree on how to divide a set of items among you and "
    "another player.\n"
    "\n"
    "Rules:\n"
    "(a) You and the other player are given a set of items. Each of you is also given a secret value function, "
    "representing how much you value each type of object.\n"
    "(b) You exchange messages with the other player to agree on who gets which items. You can send a maximum of "
    "$N$ messages each, or terminate early by making a secret proposal at any time.\n"
    "(c) You are each asked to submit a secret proposal indicating the items you want formatted in square brackets "
    "as follows: \"[Proposal: <number> <object name>, <number> <object name>, <...>]\"\n"
    "(d) If your proposals are complementary, i.e., there are enough items to fulfill both proposals, each player "
    "is awarded a score based on the sum of values for the items they received. Otherwise, both of you get zero "
    "points.\n"
    "(e) $GOAL$\n"
    "\n"
    "Let us start.\n"
    "\n"
    "The set of available items is:\n"
    "\n"
    "$ITEMS$\n"
    "\n"
    "Your secret value function is:\n"
    "\n"
    "$VALUE_FUNCTION$\n"
    "\n"
    "IMPORTANT: Your messages, unless it is the secret proposal, are directly transmitted to the other player, so "
    "do not include any response to the rules or text announcing your message. To make a secret proposal, use the "
    "indicated format. Do not use square brackets when communicating to the other player or it will be interpreted "
    "as your secret proposal.";

inline const char* kDondInitialDe =
    "Sie spielen ein Verhandlungsspiel, bei dem Sie sich mit einem anderen Spieler darauf einigen müssen, wie eine "
    "Reihe von Gegenständen aufgeteilt werden soll.\n"
    "\n"
    "Die Regeln:\n"
    "(a) Sie und der andere Spieler erhalten eine Sammlung von Gegenständen. Jeder von Ihnen erhält außerdem eine "
    "geheime Wertfunktion, die angibt, wie viel Ihnen jede Art von Gegenstand wert ist.\n"
    "(b) Sie tauschen Nachrichten mit dem anderen Spieler aus, um zu vereinbaren, wer welche Gegenstände bekommt. "
    "Sie können jeweils maximal $N$ Nachrichten senden oder das Spiel vorzeitig beenden, indem Sie jederzeit einen "
    "geheimen Vorschlag machen.\n"
    "(c) Jeder von euch wird aufgefordert, einen geheimen Vorschlag zu machen, in dem ihr die gewünschten "
    "Gegenstände in eckigen Klammern wie folgt angibt: \"[Vorschlag: <Nummer> <Objektname>, <Nummer> "
    "<Objektname>, <...>]\"\n"
    "(d) Wenn eure Vorschläge komplementär sind, d.h. es gibt genug Gegenstände, um beide Vorschläge zu erfüllen, "
    "erhält jeder Spieler eine Punktzahl, die sich aus der Summe der Werte für die Gegenstände ergibt, die er "
    "erhalten hat. Andernfalls erhalten Sie beide null Punkte.\n"
    "(e) $GOAL$\n"
    "\n"
    "Beginnen wir.\n"
    "\n"
    "Die Menge der verfügbaren Gegenstände ist:\n"
    "\n"
    "$ITEMS$\n"
    "\n"
    "Deine geheime Wertfunktion ist:\n"
    "\n"
    "$VALUE_FUNCTION$\n"
    "\n"
    "WICHTIG: Ihre Nachrichten werden, sofern es sich nicht um einen geheimen Vorschlag handelt, direkt an den "
    "anderen Spieler übermittelt, also fügen Sie keine Antwort auf die Regeln oder einen Text zur Ankündigung Ihrer "
    "Nachricht ein. Um einen geheimen Vorschlag zu machen, verwenden Sie das angegebene Format. Verwenden Sie keine "
    "eckigen Klammern, wenn Sie mit dem anderen Spieler kommunizieren, sonst wird dies als Ihr geheimer Vorschlag "
    "interpretiert.";

inline const char* kDondInitialIt =
    "State giocando a un gioco di negoziazione in cui dovete accordarvi su come dividere una serie di oggetti tra "
    "voi e un altro giocatore.\n"
    "\n"
    "Regole:\n"
    "(a) A Lei e all'altro giocatore viene dato un insieme di oggetti. Ognuno di voi riceve anche una funzione di "
    "valore segreta, che rappresenta il valore di ciascun tipo di oggetto.\n"
    "(b) Si scambiano messaggi con l'altro giocatore per concordare chi si aggiudica gli oggetti. Potete inviare un "
    "massimo di $N$ messaggi ciascuno, oppure terminare in anticipo facendo una proposta segreta in qualsiasi "
    "momento.\n"
    "(c) A ciascuno di voi viene chiesto di inviare una proposta segreta indicando gli oggetti che desiderate, "
    "formattata tra parentesi quadre come segue: \"[Proposta: <numero> <nome oggetto>, <numero> <nome oggetto>, "
    "<...>]\".\n"
    "(d) Se le vostre proposte sono complementari, cioè ci sono abbastanza oggetti per soddisfare entrambe le "
    "proposte, a ciascun giocatore viene assegnato un punteggio basato sulla somma dei valori degli oggetti "
    "ricevuti. In caso contrario, entrambi ricevono zero punti.\n"
    "(e) $GOAL$\n"
    "\n"
    "Cominciamo.\n"
    "\n"
    "L'insieme degli oggetti disponibili è:\n"
    "\n"
    "$ITEMS$\n"
    "\n"
    "La funzione valore segreta è:\n"
    "\n"
    "$VALUE_FUNCTION$\n"
    "\n"
    "IMPORTANTE: i vostri messaggi, a meno che non si tratti di una proposta segreta, vengono trasmessi "
    "direttamente all'altro giocatore, quindi non includete alcuna risposta alle regole o testo di annuncio del "
    "vostro messaggio. Per fare una proposta segreta, utilizzate il formato indicato. Non utilizzare delle parentesi "
    "quadre quando si comunica all'altro giocatore, altrimenti verrà interpretata come una proposta segreta.";

// $GRID$ is the rendered board, $OBJECTS$ the quoted letter list.
inline const char* kCleanupInitialEn =
    "I am your game master, and you are playing a collaborative game with the following grid as game board:\n"
    "$GRID$\n"
    "* The upper edge displays x-coordinates increasing to the right, and the right edge y-coordinates increasing "
    "downward.\n"
    "* The following objects are randomly placed on your grid: $OBJECTS$.\n"
    "The other player sees a variation of the game board, where the objects are placed at different random "
    "locations. You cannot see the other player's board, and they cannot see yours.\n"
    "\n"
    "**Goal:**\n"
    "Both players need to move the objects on their respective background so that identical objects end up at the "
    "same coordinates. You have to communicate with the other player to agree upon a common goal configuration.\n"
    "\n"
    "**Rules:**\n"
    "* In each turn, you can send exactly one of the following two commands:\n"
    "1. `SAY: <MESSAGE>`: to send a message (everything up until the next line break) to the other player. I will "
    "forward it to your partner.\n"
    "2. `MOVE: <OBJECT>, (<X>, <Y>)`: to move an object to a new position, where `<X>` is the column and `<Y>` is "
    "the row. I will inform you if your move was successful or not.\n"
    "* If you don't stick to the format, or send several commands at once, I have to penalize you.\n"
    "* If both players accumulate more than $MAX_PENALTIES$ penalties, you both lose the game.\n"
    "* It is vital that you communicate with the other player regarding your goal state! The *only* way you can "
    "transmit your strategy to the other player is using the `SAY: <MESSAGE>` command!\n"
    "\n"
    "**Moving Objects**\n"
    "* You can only move objects to cells within the bounds of the grid. The target cell must be empty, i.e., it "
    "must only contain the symbol '$EMPTY$'.\n"
    "* If you try to move an object to a spot that is not empty, or try to move it outside of the grid, I have to "
    "penalize you. You get another try.\n"
    "* Before making a move, double check that the target spot is empty, and does not hold any letter, frame, or "
    "line!\n"
    "\n"
    "**End of Game**\n"
    "If you think you reached the goal of aligning all objects, you can ask the other player to finish the game by "
    "sending `SAY: finished?`. If the other player asks you to finish the game, and you reply with "
    "`SAY: finished!`, the game will end.\n"
    "\n"
    "Both players win if the game ends within $MAX_ROUNDS$ rounds, where one round is defined as two players each "
    "sending a valid command.\n"
    "\n"
    "**Scoring:**\n"
    "The closer the identical objects are in both game boards, the more points you get. Penalties reduce your "
    "points. Can you beat the record?";

inline const char* kBalloonInitialEn =
    "You are participating in a collaborative negotiation game.\n"
    "\n"
    "Together with another participant, you must agree on a single set of items that will be kept. Each of you has "
    "your own view of how much each item matters to you (importance). You do not know how the other participant "
    "values the items. Additionally, you are given the effort each item demands.\n"
    "You may only agree on a set if the total effort of the selected items does not exceed a shared limit:\n"
    "\n"
    "LIMIT = $LIMIT$\n"
    "\n"
    "Here are the individual item effort values:\n"
    "\n"
    "Item effort = $ITEM_WEIGHTS$\n"
    "\n"
    "Here is your personal view on the importance of each item:\n"
    "\n"
    "Item importance values = $UTILITY_SCALE_PLAYER$\n"
    "\n"
    "Goal:\n"
    "\n"
    "Your goal is to negotiate a shared set of items that benefits you as much as possible (i.e., maximizes total "
    "importance to YOU), while staying within the LIMIT. You are not required to make a PROPOSAL in every message "
    "- you can simply negotiate as well. All tactics are allowed!\n"
    "\n"
    "Interaction Protocol:\n"
    "\n"
    "You may only use the following structured formats in a message:\n"
    "\n"
    "PROPOSAL: {'A', 'B', 'C', …}\n"
    "Propose keeping exactly those items.\n"
    "\n"
    "REFUSE: {'A', 'B', 'C', …}\n"
    "Explicitly reject opponent's proposal.\n"
    "\n"
    "ARGUMENT: {'...'}\n"
    "Defend your last proposal or argue against the player's proposal.\n"
    "\n"
    "AGREE: {'A', 'B', 'C', …}\n"
    "Accept the opponent's proposal which ends the game.\n"
    "\n"
    "$STRATEGIC_REASONING_FORMAT$\n"
    "\n"
    "Rules:\n"
    "\n"
    "You may only AGREE on a proposal the other party has logged via PROPOSAL.\n"
    "You may only REFUSE a proposal the other party has logged via PROPOSAL.\n"
    "Total effort of any PROPOSAL or AGREE set must be ≤ LIMIT.\n"
    "Do NOT reveal your hidden importance scores.\n"
    "A tag in a structured format must be followed by colon and whitespace. The argument must be a python set "
    "containing 0 or more strings.\n"
    "So, it must be of the form TAG: {...}\n"
    "Strictly follow the interaction protocol and DO NOT write anything beyond the given structure.\n"
    "The game ends when one side gives an AGREE to a PROPOSAL made by the other player.\n"
    "The content in your response which can be handed to the other player has to be non-empty.\n"
    "Only proposals which have been logged via the PROPOSAL format structure and which haven't been refused via "
    "REFUSE are active.\n"
    "\n"
    "$REQUIRE_ARGUMENT$\n"
    "$STRATEGIC_REASONING_RULE$";

inline Pack english() {
  return {
      {"dond.initial", kDondInitialEn},
      {"dond.goal.semi_competitive", "Your goal is to maximize the score you receive."},
      {"dond.goal.cooperative", "Your goal is to maximize the sum of your score and the score of the other player."},
      {"dond.timeout", "The time is up. It is now your turn to submit a secret proposal."},
      {"dond.other_proposed",
       "The other player has submitted a secret proposal. It is now your turn to submit a proposal of your own."},
      {"dond.keyword", "Proposal"},

      {"cleanup.initial", kCleanupInitialEn},
      {"cleanup.start_a", "Please send a message to the other player to start the game!"},
      {"cleanup.start_b",
       "The other player started the game by sending this message:\n\"<START_MESSAGE>\"\nWhat is your first command?"},
      {"cleanup.format_penalty",
       "Penalty: <REASON>\nMake sure that your response only contains either SAY: <MESSAGE> or MOVE: <OBJECT>, "
       "(<X>, <Y>), and nothing else!\nYou have collectively accumulated <N> of <M> penalties. Please try again!"},
      {"cleanup.reason.before", "Your message must not contain anything before the command!"},
      {"cleanup.reason.after", "Your message must not contain anything after the command!"},
      {"cleanup.reason.both", "Your message must not contain anything before or after the command!"},
      {"cleanup.reason.multiple", "Your message contains more than one command!"},
      {"cleanup.reason.format", "Your message is not in the expected format!"},
      {"cleanup.reason.must_begin", "You must begin the game by sending a message to the other player!"},
      {"cleanup.move_penalty", "<REASON>\nYou have collectively accumulated <N> of <M> penalties. Please try again!"},
      {"cleanup.move.out_of_bounds", "Invalid move: (<X>,<Y>) is out of bounds."},
      {"cleanup.move.not_empty", "Penalty: (<X>,<Y>) is not empty, but contains '<OBJECT>'."},
      {"cleanup.move.unknown_object", "Invalid move: Your image has no object with ID '<OBJECT>'."},
      {"cleanup.new_turn",
       "<LAST MOVE>\nYou are currently playing round <R> of maximum <MR>. You have collectively accumulated <N> of "
       "<M> penalties.\n<OTHER PLAYER ACTION>\nWhat is your next command?"},
      {"cleanup.last.relayed", "Your message has been relayed to the other player."},
      {"cleanup.last.moved", "Moved '<OBJECT>' to (<X>,<Y>) successfully. Your updated grid looks like this:\n<GRID>"},
      {"cleanup.other.message", "The other player sent this message:\n\"<MESSAGE>\""},
      {"cleanup.other.moved", "The other player moved an object on their grid."},

      {"balloon.initial", kBalloonInitialEn},
      {"balloon.sr_format",
       "STRATEGIC REASONING: {'...'}\nDescribe your strategic reasoning or anticipation explaining your choice of "
       "action. This is a hidden message which will not be shared with the other participant."},
      {"balloon.require_argument",
       "You must include the ARGUMENT format at least once somewhere in all of your messages."},
      {"balloon.sr_rule",
       "You must include the STRATEGIC REASONING format only once at the very beginning of every one of your "
       "messages and not more often. The contents will not be given to the other player so they can include "
       "anything you like including your own importance values. Here you should reason step by step to come up "
       "with your next move."},
      {"balloon.err.missing_sr",
       "Your response did not start with the proper strategic reasoning tag at the very beginning of your "
       "response.\nThe very first structured format must be of the form STRATEGIC REASONING: {...}. Try again."},
      {"balloon.err.missing_argument",
       "Your response did not contain an argument.\nYou must include the structured format ARGUMENT: {...} "
       "somewhere in your response. Try again."},
      {"balloon.err.untagged",
       "Your response contained an untagged sequence or you used STRATEGIC REASONING more than once.\nYou may only "
       "use the structured formats as explained in the initial message.\nThey must all be of the form TAG: {...}."},
      {"balloon.err.only_sr",
       "Your response only contained a strategic reasoning tag.\nYou must at least include one more valid tag in "
       "your response, so that the other player receives a message. Try again."},
      {"balloon.err.invalid_set",
       "You used a <TAG> tag, but did not provide a valid python set containing strings as arguments, e.g. {'A', "
       "'B', 'C', ...}. Try again."},
      {"balloon.err.refuse_inactive",
       "You refused a proposal which is not active.\nProposals are only active if they have been logged by the "
       "other player via PROPOSAL and have not been deactivated by you via REFUSE. Try again."},
      {"balloon.err.multiple_agree", "You made more than one agreement.\nFinal deals cannot be ambiguous. Try again."},
      {"balloon.err.agree_inactive",
       "You agreed to a proposal which is not active.\nProposals are only active if they have been logged by the "
       "other player via PROPOSAL and have not been deactivated by you via REFUSE. Try again."},
      {"balloon.err.unknown_items", "Your proposal includes items which are not in the game. Try again."},
      {"balloon.err.over_limit", "The total effort of your proposal exceeds the LIMIT. Try again."},
  };
}

inline Pack german() {
  return {
      {"dond.initial", kDondInitialDe},
      {"dond.timeout", "Die Zeit ist um. Sie sind jetzt an der Reihe, einen geheimen Vorschlag einzureichen."},
      {"dond.other_proposed",
       "Der andere Spieler hat einen geheimen Vorschlag gemacht. Jetzt bist du an der Reihe, einen eigenen "
       "Vorschlag zu machen."},
      {"dond.keyword", "Vorschlag"},
  };
}

inline Pack italian() {
  return {
      {"dond.initial", kDondInitialIt},
      {"dond.timeout", "Il tempo è scaduto. Ora tocca a Lei presentare una proposta segreta."},
      {"dond.other_proposed",
       "L'altro giocatore ha presentato una proposta segreta. Ora tocca a Lei presentare una sua proposta."},
      {"dond.keyword", "Proposta"},
  };
}

}  // namespace detail

class Templates {
 public:
  Templates() {
    packs_[Locale::en] = detail::english();
    packs_[Locale::de] = detail::german();
    packs_[Locale::it] = detail::italian();
  }

  static const Templates& builtin() {
    static const Templates t;
    return t;
  }

  const std::string& get(Locale locale, const std::string& key) const {
    const auto& pack = packs_.at(locale);
    if (auto it = pack.find(key); it != pack.end()) return it->second;
    const auto& en = packs_.at(Locale::en);
    if (auto it = en.find(key); it != en.end()) return it->second;
    throw InvalidInput("unknown template key '" + key + "'");
  }

  bool has_own(Locale locale, const std::string& key) const { return packs_.at(locale).count(key) > 0; }

  void set(Locale locale, const std::string& key, std::string text) { packs_[locale][key] = std::move(text); }

  void load_overrides(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot read template pack " + path);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw InvalidInput("malformed template pack " + path + ": " + e.what());
    }
    for (const auto& [loc, entries] : j.items()) {
      const auto locale = parse_enum<Locale>(loc, "locale");
      for (const auto& [key, text] : entries.items()) set(locale, key, text.get<std::string>());
    }
  }

 private:
  std::map<Locale, detail::Pack> packs_;
};

}  // namespace negobench
