package com.example.bank;

import java.util.ArrayList;
import java.util.Collections;
import java.util.List;

/**
 * A simple bank account with an audit trail.
 */
public class Account {
    private static final long OVERDRAFT_LIMIT = -500L;

    private final String owner;
    private long balance;
    private final List<String> history = new ArrayList<>();

    public Account(String owner, long openingBalance) {
        if (owner == null || owner.isEmpty()) {
            throw new IllegalArgumentException("owner must be set");
        }
        this.owner = owner;
        this.balance = openingBalance;
        history.add("open " + openingBalance);
    }

    public Account(String owner) {
        this(owner, 0L);
    }

    public void deposit(long amount) {
        if (amount <= 0) {
            throw new IllegalArgumentException("deposit must be positive: " + amount);
        }
        balance += amount;
        history.add("deposit " + amount);
    }

    public boolean withdraw(long amount) {
        if (amount <= 0) {
            return false;
        }
        if (balance - amount < OVERDRAFT_LIMIT) {
            history.add("rejected " + amount);
            return false;
        }
        balance -= amount;
        history.add("withdraw " + amount);
        return true;
    }

    public void transferTo(Account other, long amount) {
        if (other == null) {
            throw new NullPointerException("target account");
        }
        if (other != this && withdraw(amount)) {
            other.deposit(amount);
        }
    }

    public long interest(int percent, int months) {
        long perMonth = balance * percent / 100 / 12;
        return perMonth * months;
    }

    public boolean isOverdrawn() {
        return balance < 0;
    }

    public String getOwner() {
        return owner;
    }

    public long getBalance() {
        return balance;
    }

    public List<String> getHistory() {
        return Collections.unmodifiableList(history);
    }

    @Override
    public String toString() {
        return owner + ": " + balance;
    }
}
